#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "linecolor/counting.hpp"
#include "linecolor/instance.hpp"
#include "linecolor/specmat.hpp"
#include "linecolor/symmetry.hpp"

namespace linecolor {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct FaceDistribution {
  int level = 0;
  std::vector<std::pair<std::vector<Label>, double>> weights;

  double total() const {
    double s = 0.0;
    for (const auto& [face, w] : weights) s += w;
    return s;
  }
};

/// pi_{tau,j}: the j-subsets of C_{tau,1} weighted by mu^tau_S(omega)/binom(k,j).
inline FaceDistribution face_distribution(const PinnedInstance& p, int j, const ExtensionCounter& counter) {
  const int k = p.codim();
  if (j < 1 || j > k) throw Error("face level out of range");
  FaceDistribution out;
  out.level = j;
  const auto& free = p.free_vertices();
  const BigInt z = counter.count(p.pinning());
  const double norm = binomial(k, j);
  std::vector<int> pick(j);
  // Subsets of the free vertices in lexicographic order.
  std::vector<int> sel(k, 0);
  std::fill(sel.begin(), sel.begin() + j, 1);
  do {
    std::vector<int> subset;
    for (int t = 0; t < k; ++t)
      if (sel[t]) subset.push_back(free[t]);
    for_each_extension(p, subset, {}, nullptr, [&](const std::vector<int>& color, const BigInt&) {
      PartialColoring ext(p.instance().size());
      ext.color = color;
      const double w = to_double_ratio(counter.count(ext), z) / norm;
      if (w == 0.0) return;
      std::vector<Label> face;
      for (int v : subset) face.push_back({v, color[v]});
      out.weights.emplace_back(std::move(face), w);
    });
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return out;
}

/// Dense local walk at a link: pi_tau over its support and the symmetric
/// matrix Pi_tau P_tau. For codim 1 the walk matrix is zero.
struct LocalWalk {
  std::vector<Label> index;
  Eigen::VectorXd pi;
  Eigen::MatrixXd pi_p;
  int codim = 0;

  int size() const { return static_cast<int>(index.size()); }
  int position(Label x) const {
    auto it = std::lower_bound(index.begin(), index.end(), x);
    return (it != index.end() && *it == x) ? static_cast<int>(it - index.begin()) : -1;
  }
  Eigen::MatrixXd transition() const { return pinv_diag(pi).asDiagonal() * pi_p; }
  Eigen::MatrixXd symmetrized() const {
    const Eigen::VectorXd s = pinv_sqrt(pi);
    return s.asDiagonal() * pi_p * s.asDiagonal();
  }
  LabeledMatrix pi_matrix() const { return LabeledMatrix(index, Eigen::MatrixXd(pi.asDiagonal())); }
  LabeledMatrix pi_p_matrix() const { return LabeledMatrix(index, pi_p); }
};

namespace detail {

inline LocalWalk walk_statistics(const PinnedInstance& p, std::uint64_t node_cap) {
  const ColoringInstance& inst = p.instance();
  const int k = p.codim();
  LocalWalk w;
  w.codim = k;
  std::vector<std::vector<int>> pos(inst.size(), std::vector<int>(inst.q + 1, -1));
  for (int v : p.free_vertices())
    for (int c : p.residual_list(v)) {
      pos[v][c] = static_cast<int>(w.index.size());
      w.index.push_back({v, c});
    }
  const int d = static_cast<int>(w.index.size());
  std::vector<std::uint64_t> n1(d, 0);
  std::vector<std::uint64_t> n2(static_cast<std::size_t>(d) * d, 0);
  std::uint64_t z = 0;
  std::vector<int> at(k);
  const auto& free = p.free_vertices();
  for_each_extension(
      p, free, {}, nullptr,
      [&](const std::vector<int>& color, const BigInt&) {
        ++z;
        for (int t = 0; t < k; ++t) {
          at[t] = pos[free[t]][color[free[t]]];
          ++n1[at[t]];
        }
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b)
            if (a != b) ++n2[static_cast<std::size_t>(at[a]) * d + at[b]];
      },
      node_cap);
  if (z == 0) throw Error("link has no proper completion");

  std::vector<int> keep;
  for (int a = 0; a < d; ++a)
    if (n1[a] > 0) keep.push_back(a);
  LocalWalk out;
  out.codim = k;
  const int m = static_cast<int>(keep.size());
  out.pi = Eigen::VectorXd(m);
  out.pi_p = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    out.index.push_back(w.index[keep[a]]);
    out.pi(a) = static_cast<double>(n1[keep[a]]) / (static_cast<double>(k) * static_cast<double>(z));
  }
  if (k >= 2) {
    const double scale = static_cast<double>(k) * (k - 1) * static_cast<double>(z);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        out.pi_p(a, b) = static_cast<double>(n2[static_cast<std::size_t>(keep[a]) * d + keep[b]]) / scale;
  }
  return out;
}

}  // namespace detail

/// P_tau(x,y) = pi_{tau,2}({x,y}) / (2 pi_tau(x)) by full enumeration of the link.
inline LocalWalk local_walk(const PinnedInstance& p, std::uint64_t node_cap = 50'000'000) {
  if (p.codim() < 2) throw Error("local walk needs codim at least 2");
  return detail::walk_statistics(p, node_cap);
}

struct GarlandReport {
  double dev_pi = 0.0;     // |E[Pi_x] - Pi|
  double dev_pi_p = 0.0;   // |E[Pi_x P_x] - Pi P|, only for codim >= 3
  double dev_pi_pi = 0.0;  // |E[pi_x pi_x^T] - Pi P^2|
  bool pi_p_checked = false;
  bool pass = true;
};

/// Compares both sides of the three Garland identities at the link of tau.
/// The left sides are assembled from independently enumerated child links.
inline GarlandReport garland_check(const PinnedInstance& p, double tol = 1e-10, std::uint64_t node_cap = 50'000'000) {
  const LocalWalk top = local_walk(p, node_cap);
  const int d = top.size();
  Eigen::MatrixXd e_pi = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd e_pi_p = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd e_pi_pi = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    const Label x = top.index[a];
    const LocalWalk child = detail::walk_statistics(extend(p, x.vertex, x.color), node_cap);
    std::vector<int> where(child.size());
    for (int t = 0; t < child.size(); ++t) {
      where[t] = top.position(child.index[t]);
      if (where[t] < 0) throw Error("child link leaves the parent support");
    }
    const double wx = top.pi(a);
    for (int s = 0; s < child.size(); ++s) {
      e_pi(where[s], where[s]) += wx * child.pi(s);
      for (int t = 0; t < child.size(); ++t) {
        e_pi_p(where[s], where[t]) += wx * child.pi_p(s, t);
        e_pi_pi(where[s], where[t]) += wx * child.pi(s) * child.pi(t);
      }
    }
  }
  const Eigen::MatrixXd pi = top.pi.asDiagonal();
  const Eigen::MatrixXd pi_p2 = top.pi_p * pinv_diag(top.pi).asDiagonal() * top.pi_p;
  GarlandReport r;
  r.dev_pi = max_abs(e_pi - pi);
  r.dev_pi_pi = max_abs(e_pi_pi - pi_p2);
  r.pi_p_checked = p.codim() >= 3;
  if (r.pi_p_checked) r.dev_pi_p = max_abs(e_pi_p - top.pi_p);
  r.pass = r.dev_pi <= tol && r.dev_pi_pi <= tol && r.dev_pi_p <= tol;
  return r;
}

/// Entry access to pi_tau and Pi_tau P_tau through memoized counts. Works at
/// any q since only representative entries are ever requested.
class WalkEntries {
 public:
  WalkEntries(const PinnedInstance& p, const ExtensionCounter& counter)
      : p_(&p), counter_(&counter), k_(p.codim()), z_(counter.count(p.pinning())) {
    if (z_ == 0) throw Error("link has no proper completion");
  }

  int codim() const { return k_; }
  const BigInt& completions() const { return z_; }

  double pi(Label x) const {
    if (!p_->allows(x.vertex, x.color)) return 0.0;
    return to_double_ratio(counter_->count(p_->pinning().with(x.vertex, x.color)), z_) / k_;
  }
  double pi_p(Label x, Label y) const {
    if (k_ < 2 || x.vertex == y.vertex) return 0.0;
    if (!p_->allows(x.vertex, x.color) || !p_->allows(y.vertex, y.color)) return 0.0;
    const PartialColoring ext = p_->pinning().with(x.vertex, x.color).with(y.vertex, y.color);
    return to_double_ratio(counter_->count(ext), z_) / (static_cast<double>(k_) * (k_ - 1));
  }
  /// Entry of Pi^{-1/2} (Pi P) Pi^{-1/2}, which shares the spectrum of P_tau.
  double symmetrized(Label x, Label y) const {
    const double a = pi(x);
    const double b = pi(y);
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return pi_p(x, y) / std::sqrt(a * b);
  }

 private:
  const PinnedInstance* p_;
  const ExtensionCounter* counter_;
  int k_;
  BigInt z_;
};

/// Reduced index over the support of pi_tau.
inline ReducedIndex walk_index(const PinnedInstance& p, const ExtensionCounter& counter, bool use_symmetry,
                               std::span<const int> extra_named = {}) {
  ReducedIndex idx = reduced_index(p, use_symmetry ? &counter.symmetry() : nullptr, extra_named);
  const WalkEntries e(p, counter);
  std::erase_if(idx.named, [&](Label x) { return e.pi(x) <= 0.0; });
  std::erase_if(idx.slots,
                [&](const ReducedIndex::Slot& s) { return e.pi({s.vertex, idx.classes[s.cls][0]}) <= 0.0; });
  return idx;
}

inline std::vector<Eigenvalue> walk_spectrum(const PinnedInstance& p, const ExtensionCounter& counter,
                                             bool use_symmetry = true) {
  if (p.codim() < 2) throw Error("local walk needs codim at least 2");
  const WalkEntries e(p, counter);
  const ReducedIndex idx = walk_index(p, counter, use_symmetry);
  return reduced_spectrum(idx, [&](Label x, Label y) { return e.symmetrized(x, y); });
}

inline double walk_lambda2(const PinnedInstance& p, const ExtensionCounter& counter, bool use_symmetry = true) {
  return second_largest(walk_spectrum(p, counter, use_symmetry));
}

/// gamma_d = max over faces of dimension d (codim n - d) of lambda_2(P_tau),
/// for d = 0..n-2, one representative per color orbit.
inline std::vector<double> local_spectral_profile(const ColoringInstance& inst, const ExtensionCounter& counter,
                                                  bool use_symmetry = true) {
  const int n = inst.size();
  std::vector<double> gamma(std::max(0, n - 1), -std::numeric_limits<double>::infinity());
  const ColorSymmetry* sym = use_symmetry ? &counter.symmetry() : nullptr;
  for (int d = 0; d + 2 <= n; ++d) {
    for_each_face_orbit(inst, sym, d, [&](const PartialColoring& tau, const BigInt&) {
      const PinnedInstance p(inst, tau);
      gamma[d] = std::max(gamma[d], walk_lambda2(p, counter, use_symmetry));
    });
  }
  return gamma;
}

struct GlobalBound {
  double bound = 1.0;  // upper bound on lambda_2(P_GL)
  bool degenerate = false;
};

inline GlobalBound local_to_global_gap(const std::vector<double>& profile) {
  const double n = static_cast<double>(profile.size() + 1);
  GlobalBound out;
  double prod = 1.0;
  for (double g : profile) {
    g = std::max(g, 0.0);  // any upper bound works; negative levels add nothing
    if (g >= 1.0) {
      out.degenerate = true;
      out.bound = 1.0;
      return out;
    }
    prod *= 1.0 - g;
  }
  out.bound = 1.0 - prod / n;
  return out;
}

}  // namespace linecolor
