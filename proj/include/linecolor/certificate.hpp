#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "linecolor/complex.hpp"
#include "linecolor/constraints.hpp"
#include "linecolor/counting.hpp"
#include "linecolor/instance.hpp"
#include "linecolor/parallel.hpp"
#include "linecolor/specmat.hpp"
#include "linecolor/symmetry.hpp"

namespace linecolor {

// ---------------------------------------------------------------------------
// Coefficient schedule

enum class ScheduleMode { strict, permissive };

struct CertificateSchedule {
  int delta = 1;
  int beta = 2;
  double iota = 1.0;
  double gamma = 0.0;
  double c_delta = 0.0;
  double cap = 0.1;             // upper bound imposed on b_h
  std::vector<double> a;        // a[h], h = 0..delta
  std::vector<double> b_prime;  // b_prime[h-1], h = 1..delta
  std::vector<double> b;        // b[h-1]
  double eta_prime = 0.0;
  bool bprime_solvable = false;  // discriminant of the b' quadratic is nonnegative
  bool heart = false;            // beta meets the four lines on beta
  bool simplified = false;       // beta meets the simplified closed-form bound
  std::vector<Violation> violations;  // of the joint system for (b', b)

  bool feasible() const { return heart && bprime_solvable && violations.empty(); }

  double a_of(int h) const {
    if (h <= 0) return 0.0;
    if (h > delta) throw Error("clique index exceeds the schedule horizon");
    return a[h];
  }
  double bp(int h) const {
    if (h < 1 || h > delta) throw Error("b' index out of range");
    return b_prime[h - 1];
  }
  double bh(int h) const {
    if (h < 1 || h > delta) throw Error("b index out of range");
    return b[h - 1];
  }
};

/// b_h = 5 C log D (1 + (6 log D + 16/5) h log h)/(beta-1)^2, the composition of
/// the two coefficient lemmas with b_1 = 5 C log D/(beta-1)^2.
inline double b_closed_form(double c_delta, int delta, int beta, int h) {
  const double l = std::log(static_cast<double>(delta));
  const double p2 = static_cast<double>(beta - 1) * (beta - 1);
  const double hl = h * std::log(static_cast<double>(h));
  return 5.0 * c_delta * l * (1.0 + (6.0 * l + 16.0 / 5.0) * hl) / p2;
}

/// The variant without the log D prefactor, kept for comparison.
inline double b_closed_form_unscaled(double c_delta, int delta, int beta, int h) {
  const double l = std::log(static_cast<double>(delta));
  const double p2 = static_cast<double>(beta - 1) * (beta - 1);
  const double hl = h * std::log(static_cast<double>(h));
  return 5.0 * c_delta * (1.0 + (6.0 * l + 16.0 / 5.0) * hl) / p2;
}

inline CertificateSchedule build_schedule(int delta, int beta, double iota_override = 0.0,
                                          ScheduleMode mode = ScheduleMode::strict, double cap = 0.1) {
  if (beta < 2) throw Error("beta must be at least 2");
  if (mode == ScheduleMode::strict && beta < 21) throw Error("beta below 21");
  CertificateSchedule s;
  s.delta = std::max(delta, 1);
  s.beta = beta;
  s.cap = cap;
  s.iota = iota_override > 0.0 ? iota_override : iota_default(static_cast<double>(s.delta));
  s.gamma = 2.0 * (1.0 + s.iota) * std::exp(s.iota) / (beta - 1);
  s.c_delta = c_of_delta(s.iota);
  s.a.assign(s.delta + 1, 0.0);
  for (int h = 1; h <= s.delta; ++h) s.a[h] = 1.0 / (1.0 + 4.0 * s.gamma * (h - 1));

  ConstraintSystem bp{SystemKind::b_prime, 4.0, s.c_delta, cap, 0.5, s.delta, static_cast<double>(beta - 1)};
  const CoefficientSolution sol = solve_bprime(bp);
  s.b_prime = sol.values;
  s.eta_prime = sol.eta;
  s.bprime_solvable = std::none_of(sol.violations.begin(), sol.violations.end(),
                                   [](const Violation& v) { return v.constraint == "discriminant"; });

  s.b.resize(s.delta);
  if (s.delta == 1) {
    s.b[0] = s.b_prime[0];
  } else {
    for (int h = 1; h <= s.delta; ++h) s.b[h - 1] = b_closed_form(s.c_delta, s.delta, beta, h);
  }

  if (s.delta >= 2) {
    const BetaThreshold t = beta_threshold(s.delta, iota_override);
    s.heart = beta >= t.heart;
    s.simplified = beta >= t.simplified;
  } else {
    s.heart = s.simplified = beta >= 21;
  }
  std::vector<double> joint = s.b_prime;
  joint.insert(joint.end(), s.b.begin(), s.b.end());
  ConstraintSystem js{SystemKind::combined, 4.0, s.c_delta, cap, 0.5, s.delta, static_cast<double>(beta - 1)};
  s.violations = check_system(joint, js);
  return s;
}

// ---------------------------------------------------------------------------
// Per-color blocks

struct CertificateOptions {
  double tol_eig = 1e-9;
  double tol_exact = 1e-12;
  bool use_symmetry = true;
  unsigned threads = 0;
};

/// A block N^c_tau over the free vertices whose residual list contains c.
struct ColorBlock {
  int color = 0;
  std::vector<int> vertices;
  Eigen::MatrixXd m;

  int position(int v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    return (it != vertices.end() && *it == v) ? static_cast<int>(it - vertices.begin()) : -1;
  }
  /// Zero-padded copy over a superset of vertices.
  Eigen::MatrixXd embedded(const std::vector<int>& into) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(into.size()),
                                                static_cast<Eigen::Index>(into.size()));
    std::vector<int> where(vertices.size());
    for (std::size_t a = 0; a < vertices.size(); ++a) {
      auto it = std::lower_bound(into.begin(), into.end(), vertices[a]);
      if (it == into.end() || *it != vertices[a]) throw Error("block embedding drops a vertex");
      where[a] = static_cast<int>(it - into.begin());
    }
    for (std::size_t a = 0; a < vertices.size(); ++a)
      for (std::size_t b = 0; b < vertices.size(); ++b) out(where[a], where[b]) = m(a, b);
    return out;
  }
  LabeledMatrix labeled() const {
    std::vector<Label> idx;
    for (int v : vertices) idx.push_back({v, color});
    return LabeledMatrix(std::move(idx), m);
  }
};

inline std::vector<int> color_vertices(const PinnedInstance& p, int c) {
  std::vector<int> out;
  for (int v : p.free_vertices())
    if (p.allows(v, c)) out.push_back(v);
  return out;
}

/// pi_tau(vc) for the given vertices.
inline Eigen::VectorXd pi_block(const PinnedInstance& p, int c, const std::vector<int>& verts,
                                const ExtensionCounter& counter) {
  const BigInt z = counter.count(p.pinning());
  Eigen::VectorXd out(static_cast<Eigen::Index>(verts.size()));
  for (std::size_t a = 0; a < verts.size(); ++a)
    out(a) = p.allows(verts[a], c) ? to_double_ratio(counter.count(p.pinning().with(verts[a], c)), z) / p.codim()
                                   : 0.0;
  return out;
}

namespace detail {

// Colors in L_u carried by neighbors of u under `color`, skipping vertex `skip`.
inline std::vector<int> blocked_colors(const ColoringInstance& inst, const std::vector<int>& color, int u, int skip) {
  std::vector<int> out;
  for (int w : inst.adjacency[u])
    if (w != skip && color[w] != 0 && inst.membership[u][color[w]]) out.push_back(color[w]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline int shared_size(const ColoringInstance& inst, int u, int v) {
  int n = 0;
  for (int c : inst.lists[u])
    if (inst.membership[v][c]) ++n;
  return n;
}

// List sizes of u and v, and of their intersection, under the coloring with u and v erased.
struct PairLists {
  int lu = 0;
  int lv = 0;
  int luv = 0;
  bool cu = false;  // c in L_u^{Gamma(u,v)}
  bool cv = false;
};

inline PairLists pair_lists(const ColoringInstance& inst, const std::vector<int>& color, int u, int v, int c,
                            int shared_uv) {
  const auto ru = blocked_colors(inst, color, u, v);
  const auto rv = blocked_colors(inst, color, v, u);
  PairLists out;
  out.lu = static_cast<int>(inst.lists[u].size() - ru.size());
  out.lv = static_cast<int>(inst.lists[v].size() - rv.size());
  std::vector<int> both;
  std::set_union(ru.begin(), ru.end(), rv.begin(), rv.end(), std::back_inserter(both));
  int lost = 0;
  for (int x : both)
    if (inst.membership[u][x] && inst.membership[v][x]) ++lost;
  out.luv = shared_uv - lost;
  out.cu = inst.membership[u][c] && !std::binary_search(ru.begin(), ru.end(), c);
  out.cv = inst.membership[v][c] && !std::binary_search(rv.begin(), rv.end(), c);
  return out;
}

// l_u under the coloring with only u erased, and whether c survives.
inline std::pair<int, bool> single_list(const ColoringInstance& inst, const std::vector<int>& color, int u, int c) {
  const auto ru = blocked_colors(inst, color, u, -1);
  return {static_cast<int>(inst.lists[u].size() - ru.size()),
          inst.membership[u][c] && !std::binary_search(ru.begin(), ru.end(), c)};
}

inline bool clique_avoids(const PinnedInstance& p, int i, const std::vector<int>& color, int c) {
  for (int v : p.residual_clique(i))
    if (color[v] == c) return false;
  return true;
}

}  // namespace detail

/// Block of the codim-2 base case.
inline ColorBlock base_case_block(const PinnedInstance& p, int c, int beta) {
  if (p.codim() != 2) throw Error("base case needs codim 2");
  ColorBlock out{c, color_vertices(p, c), {}};
  const int n = static_cast<int>(out.vertices.size());
  out.m = Eigen::MatrixXd::Zero(n, n);
  const int u = p.free_vertices()[0];
  const int v = p.free_vertices()[1];
  if (!p.instance().adjacent(u, v) || n != 2) return out;
  const double lu = p.list_size(u);
  const double lv = p.list_size(v);
  const double d = lu * lv - p.shared_list_size(u, v);
  const double scale = 1.0 / ((beta - 1.0) * (beta - 1.0));
  out.m(0, 1) = out.m(1, 0) = -1.0 / (2.0 * d);
  out.m(0, 0) = scale * 0.5 * (lv - 1.0) / d;
  out.m(1, 1) = scale * 0.5 * (lu - 1.0) / d;
  return out;
}

/// A^{i,c}_tau from the boundary sum over completions that avoid c on V^i_tau.
inline ColorBlock a_matrix(const PinnedInstance& p, int i, int c, const CertificateSchedule& sched,
                           const ExtensionCounter& counter, const ColorSymmetry* sym) {
  const int k = p.codim();
  if (k < 2) throw Error("A matrix needs codim at least 2");
  ColorBlock out{c, color_vertices(p, c), {}};
  const int n = static_cast<int>(out.vertices.size());
  out.m = Eigen::MatrixXd::Zero(n, n);
  const int h = p.clique_h(i);
  const std::vector<int> members = p.color_clique(i, c);
  if (h <= 0 || members.size() < 2) return out;
  const ColoringInstance& inst = p.instance();
  const int m = static_cast<int>(members.size());
  std::vector<int> shared(m * m, 0);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) shared[a * m + b] = detail::shared_size(inst, members[a], members[b]);

  const BigInt z = counter.count(p.pinning());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  const std::vector<int> extra{c};
  for_each_extension(p, p.free_vertices(), extra, sym, [&](const std::vector<int>& color, const BigInt& w) {
    if (!detail::clique_avoids(p, i, color, c)) return;
    const double weight = to_double_ratio(w, z);
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        const auto l = detail::pair_lists(inst, color, members[a], members[b], c, shared[a * m + b]);
        if (!l.cu || !l.cv) continue;
        acc(a, b) -= weight / ((l.lu - 1.0) * (l.lv - 1.0) - (l.luv - 1.0));
      }
  });
  const double scale = sched.a_of(h) / k;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const int x = out.position(members[a]);
      const int y = out.position(members[b]);
      out.m(x, y) = out.m(y, x) = scale * acc(a, b);
    }
  return out;
}

/// A^{i,c}_tau by its defining expectation a_h (k-1) E_{sigma ~ pi_{tau,k-2}}[A^i_{tau+sigma}],
/// with the codim-2 terms taken from the base case.
inline ColorBlock a_matrix_recursive(const PinnedInstance& p, int i, int c, const CertificateSchedule& sched,
                                     const ExtensionCounter& counter, const ColorSymmetry* sym) {
  const int k = p.codim();
  if (k < 2) throw Error("A matrix needs codim at least 2");
  ColorBlock out{c, color_vertices(p, c), {}};
  const int n = static_cast<int>(out.vertices.size());
  out.m = Eigen::MatrixXd::Zero(n, n);
  const int h = p.clique_h(i);
  const std::vector<int> members = p.color_clique(i, c);
  if (h <= 0 || members.size() < 2) return out;
  const ColoringInstance& inst = p.instance();
  const BigInt z = counter.count(p.pinning());
  const double norm = binomial(k, k - 2);
  const std::vector<int> extra{c};
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      const int u = members[a];
      const int v = members[b];
      std::vector<int> rest;
      for (int w : p.free_vertices())
        if (w != u && w != v) rest.push_back(w);
      double acc = 0.0;
      for_each_extension(p, rest, extra, sym, [&](const std::vector<int>& color, const BigInt& w) {
        PartialColoring s(inst.size());
        s.color = color;
        const BigInt cnt = counter.count(s);
        if (cnt == 0) return;
        const double prob = to_double_ratio(cnt * w, z) / norm;
        const PinnedInstance q(inst, s);
        if (!q.allows(u, c) || !q.allows(v, c)) return;
        const double d = static_cast<double>(q.list_size(u)) * q.list_size(v) - q.shared_list_size(u, v);
        acc += prob * (-1.0 / (2.0 * d));
      });
      const int x = out.position(u);
      const int y = out.position(v);
      out.m(x, y) = out.m(y, x) = sched.a_of(h) * (k - 1) * acc;
    }
  return out;
}

struct XiDecomposition {
  std::vector<int> vertices;  // V^{i,c}_tau
  Eigen::MatrixXd xi;         // diagonal
  Eigen::MatrixXd remainder;
  Eigen::MatrixXd a_omega;
  double rho = 0.0;                // spectral radius of the remainder
  double max_entry = 0.0;          // largest |remainder entry|
  double reconstruction_dev = 0.0;  // max |Xi(-Adj+R)Xi - A^{i,omega}|
  double rho_bound = 0.0;          // 5h/(beta-1)
  double entry_bound = 0.0;        // 5/(beta-1)
  bool ok = true;
};

/// Main term and remainder of A^{i,omega}_tau for a completion omega (full color
/// vector including tau) that avoids c on V^i_tau.
inline XiDecomposition xi_decomposition(const PinnedInstance& p, int i, int c, const std::vector<int>& omega) {
  if (!detail::clique_avoids(p, i, omega, c)) throw Error("completion uses the color on the clique");
  const ColoringInstance& inst = p.instance();
  XiDecomposition out;
  out.vertices = p.color_clique(i, c);
  const int m = static_cast<int>(out.vertices.size());
  out.xi = Eigen::MatrixXd::Zero(m, m);
  out.remainder = Eigen::MatrixXd::Zero(m, m);
  out.a_omega = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> lbar(m, 0.0);
  for (int a = 0; a < m; ++a) {
    const auto [l, has] = detail::single_list(inst, omega, out.vertices[a], c);
    lbar[a] = l - 1.0;
    if (has) out.xi(a, a) = 1.0 / lbar[a];
  }
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const int u = out.vertices[a];
      const int v = out.vertices[b];
      const auto l = detail::pair_lists(inst, omega, u, v, c, detail::shared_size(inst, u, v));
      const double den = (l.lu - 1.0) * (l.lv - 1.0) - (l.luv - 1.0);
      if (l.cu && l.cv) out.a_omega(a, b) = out.a_omega(b, a) = -1.0 / den;
      if (out.xi(a, a) != 0.0 && out.xi(b, b) != 0.0)
        out.remainder(a, b) = out.remainder(b, a) = 1.0 - lbar[a] * lbar[b] / den;
    }
  Eigen::MatrixXd adj = Eigen::MatrixXd::Ones(m, m) - Eigen::MatrixXd::Identity(m, m);
  out.reconstruction_dev = max_abs(out.xi * (out.remainder - adj) * out.xi - out.a_omega);
  out.rho = spectral_radius(out.remainder);
  out.max_entry = max_abs(out.remainder);
  const double beta = inst.beta;
  out.rho_bound = 5.0 * p.clique_h(i) / (beta - 1.0);
  out.entry_bound = 5.0 / (beta - 1.0);
  out.ok = out.rho <= out.rho_bound + 1e-12 && out.max_entry <= out.entry_bound + 1e-12;
  return out;
}

struct IdentityCheck {
  double deviation = 0.0;  // max abs entry of lhs - rhs
  double scale = 0.0;      // max abs entry of rhs
  bool pass = true;
};

/// (1/(k |C_{tau,k}|)) Pi^{-1} sum_{omega in C'} Xi^{i,omega} = Id on V^{i,c}_tau.
/// Every computed decomposition is also checked against the remainder bounds;
/// `remainder_ok` reports whether all of them held.
inline IdentityCheck xi_sum_check(const PinnedInstance& p, int i, int c, const ExtensionCounter& counter,
                                  const ColorSymmetry* sym, double tol = 1e-10, bool* remainder_ok = nullptr,
                                  double* worst_rho_ratio = nullptr) {
  const std::vector<int> members = p.color_clique(i, c);
  const int m = static_cast<int>(members.size());
  std::vector<double> sum(m, 0.0);
  const BigInt z = counter.count(p.pinning());
  const std::vector<int> extra{c};
  bool all_ok = true;
  double worst = 0.0;
  for_each_extension(p, p.free_vertices(), extra, sym, [&](const std::vector<int>& color, const BigInt& w) {
    if (!detail::clique_avoids(p, i, color, c)) return;
    const double weight = to_double_ratio(w, z);
    const XiDecomposition d = xi_decomposition(p, i, c, color);
    all_ok = all_ok && d.ok;
    if (d.rho_bound > 0.0) worst = std::max(worst, d.rho / d.rho_bound);
    for (int a = 0; a < m; ++a) sum[a] += weight * d.xi(a, a);
  });
  if (remainder_ok) *remainder_ok = all_ok;
  if (worst_rho_ratio) *worst_rho_ratio = worst;
  IdentityCheck out;
  out.scale = 1.0;
  for (int a = 0; a < m; ++a) {
    // sum/z already divides by |C_{tau,k}|; pi_tau(uc) = count(tau+uc)/(k z).
    const double pi_k = to_double_ratio(counter.count(p.pinning().with(members[a], c)), z);
    out.deviation = std::max(out.deviation, std::abs(sum[a] / pi_k - 1.0));
  }
  out.pass = out.deviation <= tol;
  return out;
}

/// E_{x ~ pi_tau}[A^i_{tau+x}] = ((h-1) a_{h-1}/a_h + (k-1-h))/(k-1) A^i_tau with h = |V^i_tau| - 1.
inline IdentityCheck expectation_identity(const PinnedInstance& p, int i, int c, const CertificateSchedule& sched,
                                          const ExtensionCounter& counter, const ColorSymmetry* sym,
                                          double tol = 1e-10) {
  const int k = p.codim();
  if (k < 3) throw Error("expectation identity needs codim at least 3");
  const int h = p.clique_h(i);
  if (h < 1) throw Error("expectation identity needs h >= 1");
  const ColoringInstance& inst = p.instance();
  const ColorBlock top = a_matrix(p, i, c, sched, counter, sym);
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(top.m.rows(), top.m.cols());
  const BigInt z = counter.count(p.pinning());
  const std::vector<int> extra{c};
  for (int w : p.free_vertices()) {
    const std::vector<int> one{w};
    for_each_extension(p, one, extra, sym, [&](const std::vector<int>& color, const BigInt& wt) {
      PartialColoring s(inst.size());
      s.color = color;
      const double prob = to_double_ratio(counter.count(s) * wt, z) / k;
      if (prob == 0.0) return;
      const ColorBlock child = a_matrix(PinnedInstance(inst, s), i, c, sched, counter, sym);
      lhs += prob * child.embedded(top.vertices);
    });
  }
  const double factor = ((h - 1) * sched.a_of(h - 1) / sched.a_of(h) + (k - 1 - h)) / (k - 1);
  const Eigen::MatrixXd rhs = factor * top.m;
  IdentityCheck out;
  out.deviation = max_abs(lhs - rhs);
  out.scale = max_abs(rhs);
  out.pass = out.deviation <= tol * std::max(1.0, out.scale);
  return out;
}

/// Diagonal of B^c_tau. Vertices of a two-vertex component only carry b'_1 when
/// both endpoints can take c, matching the base case.
inline Eigen::VectorXd b_matrix(const PinnedInstance& p, int c, const CertificateSchedule& sched) {
  const std::vector<int> verts = color_vertices(p, c);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(verts.size()));
  for (std::size_t a = 0; a < verts.size(); ++a) {
    const int v = verts[a];
    const int d = p.residual_degree(v);
    if (d == 0) continue;
    if (d >= 2) {
      out(a) = sched.bh(d);
      continue;
    }
    const int u = p.free_neighbors(v)[0];
    const int du = p.residual_degree(u);
    if (du == 1 && !p.allows(u, c)) continue;
    out(a) = sched.bp(du);
  }
  return out;
}

/// (sum_i A^{i,c}_tau + Pi^c_tau B^c_tau)/(k-1), evaluated on tau directly.
inline ColorBlock direct_block(const PinnedInstance& p, int c, const CertificateSchedule& sched,
                               const ExtensionCounter& counter, const ColorSymmetry* sym) {
  const int k = p.codim();
  ColorBlock out{c, color_vertices(p, c), {}};
  const int n = static_cast<int>(out.vertices.size());
  out.m = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return out;
  for (int i = 0; i < p.clique_count(); ++i) {
    if (p.clique_h(i) < 1) continue;
    out.m += a_matrix(p, i, c, sched, counter, sym).m;
  }
  const Eigen::VectorXd pi = pi_block(p, c, out.vertices, counter);
  const Eigen::VectorXd b = b_matrix(p, c, sched);
  out.m += Eigen::MatrixXd(pi.cwiseProduct(b).asDiagonal());
  out.m /= (k - 1);
  return out;
}

/// Lexicographically least proper completion of tau (colors tried in increasing order).
inline std::vector<int> least_completion(const PinnedInstance& p) {
  const ColoringInstance& inst = p.instance();
  std::vector<int> color = p.pinning().color;
  const auto& free = p.free_vertices();
  std::function<bool(std::size_t)> go = [&](std::size_t t) {
    if (t == free.size()) return true;
    const int v = free[t];
    for (int c : inst.lists[v]) {
      bool ok = true;
      for (int w : inst.adjacency[v])
        if (color[w] == c) ok = false;
      if (!ok) continue;
      color[v] = c;
      if (go(t + 1)) return true;
      color[v] = 0;
    }
    return false;
  };
  if (!go(0)) throw Error("pinning has no proper completion");
  return color;
}

// ---------------------------------------------------------------------------
// Verification

struct BaseReport {
  LoewnerReport lower;  // Pi P - 2 pi pi^T <= M
  LoewnerReport upper;  // M <= Pi/5
  bool pass() const { return lower.pass && upper.pass; }
};

struct InductiveReport {
  bool connected = true;
  LoewnerReport expectation;  // E[M_{tau+x}] <= M - (k-1)/(k-2) M Pi^{-1} M
  LoewnerReport cap;          // M <= (k-1)/(3k-1) Pi
  double product_dev = 0.0;   // disconnected faces: assembled vs direct formula
  bool product_ok = true;
  int worst_color = 0;
  bool pass() const { return connected ? (expectation.pass && cap.pass) : product_ok; }
};

struct SpectralConclusion {
  double lambda2 = 0.0;   // lambda_2(P_tau)
  double lambda1 = 0.0;   // lambda_1(Pi^{-1} M_tau)
  double mains = 0.0;     // 1/(9(k-1))
  bool ok = true;         // lambda2 <= lambda1 + 1e-9
  bool mains_ok = true;   // lambda2 <= mains + 1e-8
};

struct FaceReport {
  PartialColoring tau;
  int codim = 0;
  bool connected = true;
  BigInt orbit = 1;
  std::optional<BaseReport> base;
  std::optional<InductiveReport> inductive;
  SpectralConclusion conclusion;
  bool checks_pass = true;
  bool chain_pass = true;  // this face and every extension of it pass
};

struct VerifyResult {
  std::vector<FaceReport> faces;
  bool checks_pass = true;
  bool conclusion_pass = true;  // conclusion holds on every face whose chain passed
  bool mains_pass = true;
  int first_failure = -1;       // index into faces
  std::size_t faces_checked = 0;
};

class CertificateEngine {
 public:
  CertificateEngine(const ColoringInstance& inst, CertificateSchedule sched, const ExtensionCounter& counter,
                    CertificateOptions opt = {})
      : inst_(&inst), sched_(std::move(sched)), counter_(&counter), opt_(opt) {
    if (&counter.instance() != &inst) throw Error("counter belongs to another instance");
  }

  const ColoringInstance& instance() const { return *inst_; }
  const CertificateSchedule& schedule() const { return sched_; }
  const ExtensionCounter& counter() const { return *counter_; }
  const ColorSymmetry* symmetry() const { return opt_.use_symmetry ? &counter_->symmetry() : nullptr; }

  /// N^c_tau (the color-c block of M_tau).
  ColorBlock block(const PartialColoring& tau, int c) const {
    std::vector<int> extra{c};
    PartialColoring key_tau = tau;
    if (opt_.use_symmetry) key_tau = counter_->symmetry().canonical(tau, &extra);
    std::vector<int> key = key_tau.color;
    key.push_back(extra[0]);
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return relabeled(it->second, c);
    }
    ColorBlock value = compute_block(PinnedInstance(*inst_, key_tau), extra[0]);
    std::unique_lock lock(mu_);
    memo_.emplace(std::move(key), value);
    return relabeled(value, c);
  }

  std::size_t memo_size() const {
    std::shared_lock lock(mu_);
    return memo_.size();
  }

  /// Colors whose blocks represent every color: all colors of tau and one
  /// member per remaining symmetry class (every color without symmetry).
  std::vector<int> block_colors(const PinnedInstance& p) const {
    std::vector<int> out;
    if (!opt_.use_symmetry) {
      for (int c = 1; c <= inst_->q; ++c)
        if (!color_vertices(p, c).empty()) out.push_back(c);
      return out;
    }
    const std::vector<int> named = p.used_colors();
    for (int c : named)
      if (!color_vertices(p, c).empty()) out.push_back(c);
    const ColorSymmetry& sym = counter_->symmetry();
    for (int k = 0; k < sym.class_count(); ++k)
      for (int c : sym.members(k))
        if (!std::binary_search(named.begin(), named.end(), c)) {
          if (!color_vertices(p, c).empty()) out.push_back(c);
          break;
        }
    return out;
  }

  /// M_tau over every label of C_{tau,1} (small instances only).
  LabeledMatrix certificate_matrix(const PinnedInstance& p) const {
    std::vector<Label> idx;
    for (int v : p.free_vertices())
      for (int c : p.residual_list(v)) idx.push_back({v, c});
    std::sort(idx.begin(), idx.end(), [](Label a, Label b) { return std::tie(a.color, a.vertex) < std::tie(b.color, b.vertex); });
    LabeledMatrix out(idx);
    for (int c = 1; c <= inst_->q; ++c) {
      const ColorBlock b = block(p.pinning(), c);
      for (std::size_t x = 0; x < b.vertices.size(); ++x)
        for (std::size_t y = 0; y < b.vertices.size(); ++y)
          if (b.m(x, y) != 0.0)
            out.data(out.position({b.vertices[x], c}), out.position({b.vertices[y], c})) = b.m(x, y);
    }
    return out;
  }

  BaseReport verify_base(const PinnedInstance& p) const {
    if (p.codim() != 2) throw Error("base check needs codim 2");
    const WalkEntries e(p, *counter_);
    const ReducedIndex idx = walk_index(p, *counter_, opt_.use_symmetry);
    std::map<int, ColorBlock> blocks;
    auto m_at = [&](Label x, Label y) {
      if (x.color != y.color) return 0.0;
      auto it = blocks.find(x.color);
      if (it == blocks.end()) it = blocks.emplace(x.color, block(p.pinning(), x.color)).first;
      const int a = it->second.position(x.vertex);
      const int b = it->second.position(y.vertex);
      return (a < 0 || b < 0) ? 0.0 : it->second.m(a, b);
    };
    BaseReport r;
    r.lower = reduced_psd_report(
        idx, [&](Label x, Label y) { return m_at(x, y) - e.pi_p(x, y) + 2.0 * e.pi(x) * e.pi(y); }, opt_.tol_eig);
    r.upper = make_report(std::numeric_limits<double>::infinity(), 0.0, opt_.tol_eig);
    for (int c : block_colors(p)) {
      const ColorBlock b = block(p.pinning(), c);
      const Eigen::VectorXd pi = pi_block(p, c, b.vertices, *counter_);
      const LoewnerReport rep = loewner_leq(b.m, Eigen::MatrixXd(pi.asDiagonal()) / 5.0, opt_.tol_eig);
      if (rep.min_eig_diff < r.upper.min_eig_diff) r.upper = rep;
    }
    if (!std::isfinite(r.upper.min_eig_diff)) r.upper = make_report(0.0, 0.0, opt_.tol_eig);
    return r;
  }

  InductiveReport verify_inductive(const PinnedInstance& p) const {
    const int k = p.codim();
    if (k <= 2) throw Error("inductive check needs codim above 2");
    InductiveReport r;
    r.connected = p.connected();
    if (!r.connected) {
      for (int c : block_colors(p)) {
        const ColorBlock assembled = block(p.pinning(), c);
        const ColorBlock direct = direct_block(p, c, sched_, *counter_, symmetry());
        const double dev = max_abs(assembled.m - direct.m);
        const double scale = std::max(1.0, max_abs(direct.m));
        if (dev > r.product_dev) {
          r.product_dev = dev;
          r.worst_color = c;
        }
        r.product_ok = r.product_ok && dev <= opt_.tol_exact * scale;
      }
      return r;
    }
    r.expectation = make_report(std::numeric_limits<double>::infinity(), 0.0, opt_.tol_eig);
    r.cap = r.expectation;
    const BigInt z = counter_->count(p.pinning());
    for (int c : block_colors(p)) {
      const ColorBlock top = block(p.pinning(), c);
      const Eigen::VectorXd pi = pi_block(p, c, top.vertices, *counter_);
      const Eigen::MatrixXd n = top.m;
      Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n.rows(), n.cols());
      const std::vector<int> extra{c};
      for (int w : p.free_vertices()) {
        const std::vector<int> one{w};
        for_each_extension(p, one, extra, symmetry(), [&](const std::vector<int>& color, const BigInt& wt) {
          PartialColoring s(inst_->size());
          s.color = color;
          const double prob = to_double_ratio(counter_->count(s) * wt, z) / k;
          if (prob == 0.0) return;
          expect += prob * block(s, c).embedded(top.vertices);
        });
      }
      const Eigen::MatrixXd rhs =
          n - (static_cast<double>(k - 1) / (k - 2)) * n * pinv_diag(pi).asDiagonal() * n;
      const LoewnerReport e = loewner_leq(expect, 0.5 * (rhs + rhs.transpose()), opt_.tol_eig);
      const LoewnerReport cap = loewner_leq(
          n, (static_cast<double>(k - 1) / (3.0 * k - 1.0)) * Eigen::MatrixXd(pi.asDiagonal()), opt_.tol_eig);
      if (e.min_eig_diff < r.expectation.min_eig_diff || (!e.pass && r.expectation.pass)) {
        r.expectation = e;
        r.worst_color = c;
      }
      if (cap.min_eig_diff < r.cap.min_eig_diff) r.cap = cap;
    }
    if (!std::isfinite(r.expectation.min_eig_diff)) r.expectation = make_report(0.0, 0.0, opt_.tol_eig);
    if (!std::isfinite(r.cap.min_eig_diff)) r.cap = make_report(0.0, 0.0, opt_.tol_eig);
    return r;
  }

  /// lambda_1(Pi^{-1} M_tau) as the largest eigenvalue of Pi^{-1/2} N^c Pi^{-1/2} over colors.
  double certificate_lambda1(const PinnedInstance& p) const {
    double best = 0.0;
    bool any = false;
    for (int c : block_colors(p)) {
      const ColorBlock b = block(p.pinning(), c);
      if (b.vertices.empty()) continue;
      const Eigen::VectorXd s = pinv_sqrt(pi_block(p, c, b.vertices, *counter_));
      const Eigen::MatrixXd w = s.asDiagonal() * b.m * s.asDiagonal();
      const double top = symmetric_eigenvalues(0.5 * (w + w.transpose())).maxCoeff();
      best = any ? std::max(best, top) : top;
      any = true;
    }
    return best;
  }

  SpectralConclusion spectral_conclusion(const PinnedInstance& p) const {
    SpectralConclusion s;
    const int k = p.codim();
    s.lambda2 = walk_lambda2(p, *counter_, opt_.use_symmetry);
    s.lambda1 = certificate_lambda1(p);
    s.mains = 1.0 / (9.0 * (k - 1));
    s.ok = s.lambda2 <= s.lambda1 + 1e-9;
    s.mains_ok = s.lambda2 <= s.mains + 1e-8;
    return s;
  }

  /// Runs every check on one representative of each face orbit of codim >= 2,
  /// from codim 2 upward, and tracks which faces have a fully passing chain.
  VerifyResult verify_all() const {
    VerifyResult out;
    const int n = inst_->size();
    std::map<std::vector<int>, bool> chain;
    for (int d = n - 2; d >= 0; --d) {
      std::vector<std::pair<PartialColoring, BigInt>> faces;
      for_each_face_orbit(*inst_, symmetry(), d,
                          [&](const PartialColoring& tau, const BigInt& w) { faces.emplace_back(tau, w); });
      std::vector<FaceReport> level(faces.size());
      parallel_for(
          faces.size(),
          [&](std::size_t t) {
            FaceReport& f = level[t];
            f.tau = faces[t].first;
            f.orbit = faces[t].second;
            const PinnedInstance p(*inst_, f.tau);
            f.codim = p.codim();
            f.connected = p.connected();
            if (f.codim == 2) {
              f.base = verify_base(p);
              f.checks_pass = f.base->pass();
            } else {
              f.inductive = verify_inductive(p);
              f.checks_pass = f.inductive->pass();
            }
            f.conclusion = spectral_conclusion(p);
          },
          opt_.threads);
      for (auto& f : level) {
        const PinnedInstance p(*inst_, f.tau);
        bool ok = f.checks_pass;
        if (f.codim > 2) {
          for (int w : p.free_vertices()) {
            const std::vector<int> one{w};
            for_each_extension(p, one, {}, symmetry(), [&](const std::vector<int>& color, const BigInt&) {
              PartialColoring s(n);
              s.color = color;
              auto it = chain.find(canonical_key(s));
              if (it == chain.end() || !it->second) ok = false;
            });
          }
        }
        f.chain_pass = ok;
        chain[canonical_key(f.tau)] = ok;
      }
      for (auto& f : level) {
        ++out.faces_checked;
        out.checks_pass = out.checks_pass && f.checks_pass;
        if (f.chain_pass && !f.conclusion.ok) out.conclusion_pass = false;
        out.mains_pass = out.mains_pass && f.conclusion.mains_ok;
        out.faces.push_back(std::move(f));
        if (out.first_failure < 0 && (!out.faces.back().checks_pass ||
                                      (out.faces.back().chain_pass && !out.faces.back().conclusion.ok)))
          out.first_failure = static_cast<int>(out.faces.size()) - 1;
      }
    }
    return out;
  }

 private:
  std::vector<int> canonical_key(const PartialColoring& tau) const {
    return opt_.use_symmetry ? counter_->symmetry().canonical(tau).color : tau.color;
  }

  static ColorBlock relabeled(ColorBlock b, int c) {
    b.color = c;
    return b;
  }

  ColorBlock compute_block(const PinnedInstance& p, int c) const {
    const int k = p.codim();
    if (k < 2) throw Error("certificate blocks need codim at least 2");
    if (k == 2) return base_case_block(p, c, sched_.beta);
    if (p.connected()) return direct_block(p, c, sched_, *counter_, symmetry());
    // Product rule with eta the least completion of tau.
    ColorBlock out{c, color_vertices(p, c), {}};
    const int nv = static_cast<int>(out.vertices.size());
    out.m = Eigen::MatrixXd::Zero(nv, nv);
    const std::vector<int> eta = least_completion(p);
    for (const auto& comp : p.components()) {
      const int ni = static_cast<int>(comp.size());
      if (ni < 2) continue;
      PartialColoring t = p.pinning();
      for (int v : p.free_vertices())
        if (!std::binary_search(comp.begin(), comp.end(), v)) t.color[v] = eta[v];
      const ColorBlock child = block(t, c);
      out.m += (static_cast<double>(ni) * (ni - 1) / (static_cast<double>(k) * (k - 1))) *
               child.embedded(out.vertices);
    }
    return out;
  }

  struct KeyHash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::size_t h = 1469598103934665603ull;
      for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
      return h;
    }
  };

  const ColoringInstance* inst_;
  CertificateSchedule sched_;
  const ExtensionCounter* counter_;
  CertificateOptions opt_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::vector<int>, ColorBlock, KeyHash> memo_;
};

// ---------------------------------------------------------------------------
// Matrix trickle-down on one level

/// One level of a weighted complex: the walk at tau and the walks at each tau+x,
/// all indexed by the labels of the top walk.
struct FlatComplex {
  std::vector<Label> index;
  Eigen::VectorXd pi;
  Eigen::MatrixXd pi_p;
  std::vector<double> weight;  // pi(x), aligned with index
  std::vector<Eigen::VectorXd> pi_x;
  std::vector<Eigen::MatrixXd> pi_p_x;
};

inline FlatComplex flat_complex(const PinnedInstance& p, std::uint64_t node_cap = 50'000'000) {
  if (p.codim() < 3) throw Error("flat complex needs codim at least 3");
  const LocalWalk top = local_walk(p, node_cap);
  FlatComplex f;
  f.index = top.index;
  f.pi = top.pi;
  f.pi_p = top.pi_p;
  const int d = top.size();
  for (int a = 0; a < d; ++a) {
    f.weight.push_back(top.pi(a));
    const PinnedInstance child(p.instance(), p.pinning().with(top.index[a].vertex, top.index[a].color));
    const LocalWalk w = local_walk(child, node_cap);
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd pp = Eigen::MatrixXd::Zero(d, d);
    for (int x = 0; x < w.size(); ++x) {
      const int i = top.position(w.index[x]);
      pi(i) = w.pi(x);
      for (int y = 0; y < w.size(); ++y) pp(i, top.position(w.index[y])) = w.pi_p(x, y);
    }
    f.pi_x.push_back(pi);
    f.pi_p_x.push_back(pp);
  }
  return f;
}

struct MtdReport {
  LoewnerReport child_lower;  // worst over x: Pi_x P_x - alpha pi_x pi_x^T <= Pi_x N_x
  LoewnerReport child_upper;  // worst over x: Pi_x N_x <= Pi_x/(2 alpha + 1)
  LoewnerReport n_upper;      // Pi N <= Pi/(2 alpha)
  LoewnerReport expectation;  // E[Pi_x N_x] <= Pi N - alpha Pi N^2
  LoewnerReport conclusion;   // Pi P - (2 - 1/alpha) pi pi^T <= Pi N
  double q_identity_dev = 0.0;  // |Pi(P - alpha P^2) - Pi(Q - alpha Q^2)|, Q = P - (2-1/alpha) 1 pi^T
  bool hypotheses_met = false;
  bool conclusion_checked = false;
  std::string note;
  bool pass() const { return hypotheses_met && conclusion.pass; }
};

inline LoewnerReport worse(const LoewnerReport& a, const LoewnerReport& b) {
  if (a.pass != b.pass) return a.pass ? b : a;
  return a.min_eig_diff <= b.min_eig_diff ? a : b;
}

/// Checks the hypotheses of the one-level matrix trickle-down statement and,
/// when they hold, its conclusion. n_x[a] is N_x for x = index[a].
inline MtdReport mtd_flat_check(const FlatComplex& f, const std::vector<Eigen::MatrixXd>& n_x, double alpha,
                                const Eigen::MatrixXd& n, double tol = 1e-9) {
  if (alpha < 0.5) throw Error("alpha must be at least 1/2");
  const int d = static_cast<int>(f.index.size());
  if (static_cast<int>(n_x.size()) != d) throw Error("one N_x per vertex of the complex");
  auto sym = [](const Eigen::MatrixXd& m) { return Eigen::MatrixXd(0.5 * (m + m.transpose())); };
  MtdReport r;
  bool first = true;
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    const Eigen::MatrixXd pix = f.pi_x[a].asDiagonal();
    const Eigen::MatrixXd pn = sym(pix * n_x[a]);
    const LoewnerReport lo = loewner_leq(f.pi_p_x[a] - alpha * f.pi_x[a] * f.pi_x[a].transpose(), pn, tol);
    const LoewnerReport hi = loewner_leq(pn, pix / (2.0 * alpha + 1.0), tol);
    r.child_lower = first ? lo : worse(r.child_lower, lo);
    r.child_upper = first ? hi : worse(r.child_upper, hi);
    first = false;
    expect += f.weight[a] * pn;
  }
  const Eigen::MatrixXd pi = f.pi.asDiagonal();
  const Eigen::MatrixXd pn = sym(pi * n);
  r.n_upper = loewner_leq(pn, pi / (2.0 * alpha), tol);
  r.expectation = loewner_leq(expect, sym(pn - alpha * pi * n * n), tol);
  r.hypotheses_met = r.child_lower.pass && r.child_upper.pass && r.n_upper.pass && r.expectation.pass;

  const double shift = 2.0 - 1.0 / alpha;
  const Eigen::MatrixXd p = pinv_diag(f.pi).asDiagonal() * f.pi_p;
  const Eigen::MatrixXd q = p - shift * Eigen::VectorXd::Ones(d) * f.pi.transpose();
  r.q_identity_dev = max_abs(pi * (p - alpha * p * p) - pi * (q - alpha * q * q));
  if (!r.hypotheses_met) {
    r.note = "hypotheses unmet";
    return r;
  }
  r.conclusion_checked = true;
  r.conclusion = loewner_leq(f.pi_p - shift * f.pi * f.pi.transpose(), pn, tol);
  return r;
}

}  // namespace linecolor
