#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linecolor/instance.hpp"

namespace linecolor {

/// A (vertex, color) pair, i.e. an element of C_1.
struct Label {
  int vertex = 0;
  int color = 0;
  auto operator<=>(const Label&) const = default;
};

struct LabeledMatrix {
  std::vector<Label> index;
  Eigen::MatrixXd data;

  LabeledMatrix() = default;
  explicit LabeledMatrix(std::vector<Label> idx)
      : index(std::move(idx)),
        data(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(index.size()),
                                   static_cast<Eigen::Index>(index.size()))) {}
  LabeledMatrix(std::vector<Label> idx, Eigen::MatrixXd m) : index(std::move(idx)), data(std::move(m)) {}

  int size() const { return static_cast<int>(index.size()); }
  int position(Label x) const {
    auto it = std::find(index.begin(), index.end(), x);
    return it == index.end() ? -1 : static_cast<int>(it - index.begin());
  }
  double at(Label x, Label y) const {
    const int i = position(x);
    const int j = position(y);
    return (i < 0 || j < 0) ? 0.0 : data(i, j);
  }
  /// Zero-padded copy over a larger index; labels missing from `into` must carry zeros.
  LabeledMatrix embedded(const std::vector<Label>& into) const {
    LabeledMatrix out(into);
    std::vector<int> where(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) where[k] = out.position(index[k]);
    for (std::size_t a = 0; a < index.size(); ++a)
      for (std::size_t b = 0; b < index.size(); ++b) {
        if (data(a, b) == 0.0) continue;
        if (where[a] < 0 || where[b] < 0) throw Error("embedding drops a nonzero entry");
        out.data(where[a], where[b]) = data(a, b);
      }
    return out;
  }
};

inline std::string dump(const LabeledMatrix& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int i = 0; i < m.size(); ++i) {
    os << "(" << m.index[i].vertex << "," << m.index[i].color << ")";
    for (int j = 0; j < m.size(); ++j) os << ' ' << m.data(i, j);
    os << '\n';
  }
  return os.str();
}

inline std::string dump(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
  return os.str();
}

struct LoewnerReport {
  double min_eig_diff = 0.0;
  double tolerance = 1e-9;
  double scale = 0.0;
  bool pass = true;
};

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigensolve failed");
  return solver.eigenvalues();
}

/// Verdict for 0 <= D, given the smallest eigenvalue of D and its max-abs entry.
inline LoewnerReport make_report(double min_eig, double scale, double tol) {
  LoewnerReport r;
  r.min_eig_diff = min_eig;
  r.scale = scale;
  r.tolerance = tol;
  r.pass = min_eig >= -tol * std::max(1.0, scale);
  return r;
}

inline LoewnerReport psd_report(const Eigen::MatrixXd& diff, double tol = 1e-9) {
  const double scale = max_abs(diff);
  if (max_abs(diff - diff.transpose()) > 1e-10 * std::max(1.0, scale))
    throw Error("Loewner check on an asymmetric matrix");
  if (diff.rows() == 0) return make_report(0.0, 0.0, tol);
  const Eigen::MatrixXd sym = 0.5 * (diff + diff.transpose());
  return make_report(symmetric_eigenvalues(sym).minCoeff(), scale, tol);
}

/// A <= B in the Loewner order.
inline LoewnerReport loewner_leq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol = 1e-9) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error("Loewner check on mismatched shapes");
  return psd_report(b - a, tol);
}

inline LoewnerReport loewner_leq(const LabeledMatrix& a, const LabeledMatrix& b, double tol = 1e-9) {
  if (a.index != b.index) throw Error("Loewner check on mismatched indices");
  return loewner_leq(a.data, b.data, tol);
}

inline Eigen::VectorXd pinv_diag(const Eigen::VectorXd& d) {
  Eigen::VectorXd out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < 0) throw Error("negative diagonal entry");
    out(i) = d(i) > 0 ? 1.0 / d(i) : 0.0;
  }
  return out;
}

inline Eigen::VectorXd pinv_sqrt(const Eigen::VectorXd& d) {
  Eigen::VectorXd out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < 0) throw Error("negative diagonal entry");
    out(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  }
  return out;
}

/// Exact for symmetric input; otherwise the max absolute row sum, an upper bound.
inline double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  if (max_abs(a - a.transpose()) <= 1e-12 * std::max(1.0, max_abs(a)))
    return symmetric_eigenvalues(0.5 * (a + a.transpose())).cwiseAbs().maxCoeff();
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Function of a symmetric matrix through its eigendecomposition.
inline Eigen::MatrixXd spectral_apply(const Eigen::MatrixXd& m, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigensolve failed");
  Eigen::VectorXd values = solver.eigenvalues().unaryExpr(f);
  return solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Spectra of matrices invariant under permutations inside color classes.
//
// Rows are (vertex, color). Colors are either named (kept explicit) or grouped
// into classes whose members are interchangeable. A symmetric f invariant under
// every permutation of each class splits into a trivial part (named rows plus one
// averaged row per (vertex, class)) and, for every class K with |K| >= 2, a block
// over the vertices of K repeated |K| - 1 times.

struct ReducedIndex {
  struct Slot {
    int vertex;
    int cls;
  };
  std::vector<Label> named;
  std::vector<Slot> slots;
  std::vector<std::vector<int>> classes;  // members of each class, at least one

  std::size_t full_size() const {
    std::size_t total = named.size();
    for (const auto& s : slots) total += classes[s.cls].size();
    return total;
  }
  std::vector<Label> full_index() const {
    std::vector<Label> out = named;
    for (const auto& s : slots)
      for (int c : classes[s.cls]) out.push_back({s.vertex, c});
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct Eigenvalue {
  double value;
  std::uint64_t multiplicity;
};

using EntryFn = std::function<double(Label, Label)>;

struct ReducedBlocks {
  Eigen::MatrixXd trivial;
  std::vector<Eigen::MatrixXd> standard;  // per class; empty when |K| < 2
  std::vector<std::uint64_t> multiplicity;
};

inline ReducedBlocks reduce(const ReducedIndex& idx, const EntryFn& f) {
  const int nn = static_cast<int>(idx.named.size());
  const int ns = static_cast<int>(idx.slots.size());
  ReducedBlocks out;
  out.trivial = Eigen::MatrixXd::Zero(nn + ns, nn + ns);
  auto rep = [&](const ReducedIndex::Slot& s, int k) { return Label{s.vertex, idx.classes[s.cls][k]}; };
  auto size_of = [&](int cls) { return static_cast<double>(idx.classes[cls].size()); };

  for (int a = 0; a < nn; ++a)
    for (int b = a; b < nn; ++b) out.trivial(a, b) = out.trivial(b, a) = f(idx.named[a], idx.named[b]);
  for (int a = 0; a < nn; ++a)
    for (int s = 0; s < ns; ++s) {
      const auto& slot = idx.slots[s];
      const double v = std::sqrt(size_of(slot.cls)) * f(idx.named[a], rep(slot, 0));
      out.trivial(a, nn + s) = out.trivial(nn + s, a) = v;
    }
  for (int s = 0; s < ns; ++s)
    for (int t = s; t < ns; ++t) {
      const auto& x = idx.slots[s];
      const auto& y = idx.slots[t];
      double v;
      if (x.cls == y.cls) {
        v = f(rep(x, 0), rep(y, 0));
        if (idx.classes[x.cls].size() >= 2) v += (size_of(x.cls) - 1.0) * f(rep(x, 0), rep(y, 1));
      } else {
        v = std::sqrt(size_of(x.cls) * size_of(y.cls)) * f(rep(x, 0), rep(y, 0));
      }
      out.trivial(nn + s, nn + t) = out.trivial(nn + t, nn + s) = v;
    }

  out.standard.resize(idx.classes.size());
  out.multiplicity.assign(idx.classes.size(), 0);
  for (std::size_t k = 0; k < idx.classes.size(); ++k) {
    if (idx.classes[k].size() < 2) continue;
    std::vector<int> members;
    for (int s = 0; s < ns; ++s)
      if (idx.slots[s].cls == static_cast<int>(k)) members.push_back(s);
    const int m = static_cast<int>(members.size());
    Eigen::MatrixXd block(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) {
        const auto& x = idx.slots[members[a]];
        const auto& y = idx.slots[members[b]];
        block(a, b) = block(b, a) = f(rep(x, 0), rep(y, 0)) - f(rep(x, 0), rep(y, 1));
      }
    out.standard[k] = block;
    out.multiplicity[k] = idx.classes[k].size() - 1;
  }
  return out;
}

/// Full spectrum of the invariant matrix f, sorted in decreasing order.
inline std::vector<Eigenvalue> reduced_spectrum(const ReducedIndex& idx, const EntryFn& f) {
  const ReducedBlocks blocks = reduce(idx, f);
  std::vector<Eigenvalue> out;
  const Eigen::VectorXd t = symmetric_eigenvalues(blocks.trivial);
  for (Eigen::Index i = 0; i < t.size(); ++i) out.push_back({t(i), 1});
  for (std::size_t k = 0; k < blocks.standard.size(); ++k) {
    if (blocks.multiplicity[k] == 0 || blocks.standard[k].rows() == 0) continue;
    const Eigen::VectorXd s = symmetric_eigenvalues(blocks.standard[k]);
    for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back({s(i), blocks.multiplicity[k]});
  }
  std::sort(out.begin(), out.end(), [](const Eigenvalue& a, const Eigenvalue& b) { return a.value > b.value; });
  return out;
}

/// Second largest eigenvalue counting multiplicity (-inf for a 1x1 matrix).
inline double second_largest(const std::vector<Eigenvalue>& spectrum) {
  std::uint64_t seen = 0;
  for (const auto& e : spectrum) {
    seen += e.multiplicity;
    if (seen >= 2) return e.value;
  }
  return -std::numeric_limits<double>::infinity();
}

inline double largest(const std::vector<Eigenvalue>& spectrum) {
  return spectrum.empty() ? -std::numeric_limits<double>::infinity() : spectrum.front().value;
}

/// Largest |entry| of the invariant matrix f (attained on representative pairs).
inline double reduced_max_abs(const ReducedIndex& idx, const EntryFn& f) {
  std::vector<Label> reps = idx.named;
  for (const auto& s : idx.slots) {
    reps.push_back({s.vertex, idx.classes[s.cls][0]});
    if (idx.classes[s.cls].size() >= 2) reps.push_back({s.vertex, idx.classes[s.cls][1]});
  }
  double m = 0.0;
  for (const auto& x : reps)
    for (const auto& y : reps) m = std::max(m, std::abs(f(x, y)));
  return m;
}

/// 0 <= f in the Loewner order, evaluated on the reduced blocks.
inline LoewnerReport reduced_psd_report(const ReducedIndex& idx, const EntryFn& f, double tol = 1e-9) {
  const auto spectrum = reduced_spectrum(idx, f);
  const double min_eig = spectrum.empty() ? 0.0 : spectrum.back().value;
  return make_report(min_eig, reduced_max_abs(idx, f), tol);
}

/// Dense matrix of f over the full index (for small cases and testing).
inline LabeledMatrix expand(const ReducedIndex& idx, const EntryFn& f) {
  LabeledMatrix m(idx.full_index());
  for (int a = 0; a < m.size(); ++a)
    for (int b = 0; b < m.size(); ++b) m.data(a, b) = f(m.index[a], m.index[b]);
  return m;
}

}  // namespace linecolor
