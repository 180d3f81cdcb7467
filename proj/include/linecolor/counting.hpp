#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "linecolor/instance.hpp"
#include "linecolor/symmetry.hpp"

namespace linecolor {

using BigRational = boost::multiprecision::cpp_rational;

enum class CountBackend { automatic, direct, symmetric };

struct CountOptions {
  CountBackend backend = CountBackend::automatic;
  double direct_cap = 1e7;               // max prod_v l_v^tau for direct enumeration
  std::uint64_t node_cap = 200'000'000;  // max search nodes of either backend
};

/// Residual search space prod_v l_v^tau (as a double; may be huge).
inline double search_space(const PinnedInstance& p) {
  double s = 1.0;
  for (int v : p.free_vertices()) s *= static_cast<double>(p.list_size(v));
  return s;
}

inline CountBackend choose_backend(const PinnedInstance& p, const CountOptions& opt) {
  if (opt.backend != CountBackend::automatic) return opt.backend;
  return search_space(p) <= opt.direct_cap ? CountBackend::direct : CountBackend::symmetric;
}

inline BigInt count_extensions(const PinnedInstance& p, const ColorSymmetry* sym, const CountOptions& opt = {}) {
  for (int v : p.free_vertices())
    if (p.list_size(v) == 0) return 0;
  const CountBackend backend = choose_backend(p, opt);
  if (backend == CountBackend::direct && search_space(p) > static_cast<double>(opt.node_cap))
    throw CapExceeded("direct enumeration exceeds the enumeration cap");
  if (backend == CountBackend::symmetric && !sym) throw Error("symmetric backend needs a color symmetry");
  BigInt total = 0;
  if (backend == CountBackend::direct) {
    std::uint64_t leaves = 0;
    for_each_extension(
        p, p.free_vertices(), {}, nullptr, [&](const std::vector<int>&, const BigInt&) { ++leaves; },
        opt.node_cap);
    total = leaves;
  } else {
    for_each_extension(
        p, p.free_vertices(), {}, sym, [&](const std::vector<int>&, const BigInt& w) { total += w; },
        opt.node_cap);
  }
  return total;
}

inline BigInt count_extensions(const PinnedInstance& p, const CountOptions& opt = {}) {
  const ColorSymmetry sym(p.instance());
  return count_extensions(p, &sym, opt);
}

/// Memoized extension counts for one instance. Keys are canonical pinnings, so
/// pinnings in the same color orbit share an entry. Safe for concurrent use.
class ExtensionCounter {
 public:
  explicit ExtensionCounter(const ColoringInstance& inst, CountOptions opt = {})
      : inst_(&inst), sym_(inst), opt_(opt) {}

  const ColoringInstance& instance() const { return *inst_; }
  const ColorSymmetry& symmetry() const { return sym_; }
  const CountOptions& options() const { return opt_; }

  BigInt count(const PartialColoring& tau) const {
    if (!is_proper(*inst_, tau)) return 0;
    const PartialColoring key = sym_.canonical(tau);
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(key.color);
      if (it != memo_.end()) return it->second;
    }
    const BigInt value = count_extensions(PinnedInstance(*inst_, key), &sym_, opt_);
    std::unique_lock lock(mu_);
    memo_[key.color] = value;
    return value;
  }
  BigInt count(const PinnedInstance& p) const { return count(p.pinning()); }

  /// mu^tau_S(omega) where `extended` is tau together with omega.
  double marginal(const PartialColoring& tau, const PartialColoring& extended) const {
    return to_double_ratio(count(extended), count(tau));
  }
  BigRational marginal_exact(const PartialColoring& tau, const PartialColoring& extended) const {
    return BigRational(count(extended), count(tau));
  }

  std::size_t cache_size() const {
    std::shared_lock lock(mu_);
    return memo_.size();
  }

 private:
  struct Hash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::size_t h = 1469598103934665603ull;
      for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
      return h;
    }
  };
  const ColoringInstance* inst_;
  ColorSymmetry sym_;
  CountOptions opt_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::vector<int>, BigInt, Hash> memo_;
};

/// mu^tau_S(omega): probability that a uniform extension of tau agrees with
/// omega on its domain (omega may repeat tau's assignments).
inline double marginal(const PinnedInstance& p, const PartialColoring& omega, const ExtensionCounter& counter) {
  PartialColoring ext = p.pinning();
  for (int v = 0; v < omega.size(); ++v) {
    if (!omega.assigned(v)) continue;
    if (ext.assigned(v) && ext[v] != omega[v]) return 0.0;
    ext.color[v] = omega[v];
  }
  if (!is_proper(p.instance(), ext)) return 0.0;
  return counter.marginal(p.pinning(), ext);
}

inline double marginal(const PinnedInstance& p, int v, int c, const ExtensionCounter& counter) {
  if (!p.allows(v, c)) return 0.0;
  return counter.marginal(p.pinning(), p.pinning().with(v, c));
}

namespace detail {

// Lists as bitmasks over colors 1..63; the recursion only runs on small instances.
struct RecursionState {
  const ColoringInstance* inst;
  std::map<std::pair<std::vector<std::uint64_t>, std::pair<int, int>>, double> memo;
  int depth_limit;

  // Marginal of (u,c) on the instance induced by the vertices with nonzero lists.
  double marginal(const std::vector<std::uint64_t>& lists, std::uint64_t active, int u, int c, int depth) {
    if (depth > depth_limit) throw Error("marginal recursion exceeded the vertex count");
    if (!(lists[u] >> c & 1ull)) return 0.0;
    std::vector<std::uint64_t> key = lists;
    for (int v = 0; v < static_cast<int>(key.size()); ++v)
      if (!(active >> v & 1ull)) key[v] = 0;
    auto memo_key = std::make_pair(key, std::make_pair(u, c));
    if (auto it = memo.find(memo_key); it != memo.end()) return it->second;

    std::vector<int> nbrs;
    for (int w : inst->adjacency[u])
      if (active >> w & 1ull) nbrs.push_back(w);
    const std::uint64_t rest = active & ~(1ull << u);
    double numerator = 0.0;
    double denominator = 0.0;
    for (int c2 = 1; c2 < 64; ++c2) {
      if (!(lists[u] >> c2 & 1ull)) continue;
      std::vector<std::uint64_t> l = key;
      l[u] = 0;
      double prod = 1.0;
      for (int w : nbrs) {
        prod *= 1.0 - marginal(l, rest, w, c2, depth + 1);
        l[w] &= ~(1ull << c2);
      }
      denominator += prod;
      if (c2 == c) numerator = prod;
    }
    const double value = numerator / denominator;
    memo.emplace(std::move(memo_key), value);
    return value;
  }
};

}  // namespace detail

/// p_{G,L}(uc) by the vertex-removal recursion: the probability that u gets c
/// is proportional to prod_i (1 - p_i), where p_i is the probability that the
/// i-th neighbor of u gets c on G - u with c removed from earlier neighbors.
inline double marginal_recursive(const PinnedInstance& p, int u, int c) {
  const ColoringInstance& inst = p.instance();
  if (inst.q >= 64) throw Error("marginal recursion supports q < 64");
  if (inst.size() > 63) throw Error("marginal recursion supports fewer than 64 vertices");
  if (!p.is_free(u)) throw Error("marginal recursion needs a free vertex");
  std::vector<std::uint64_t> lists(inst.size(), 0);
  std::uint64_t active = 0;
  for (int v : p.free_vertices()) {
    active |= 1ull << v;
    for (int col : p.residual_list(v)) lists[v] |= 1ull << col;
  }
  detail::RecursionState state{&inst, {}, inst.size()};
  return state.marginal(lists, active, u, c, 0);
}

struct MarginalBounds {
  double lower = 0.0;
  double upper = 1.0;
  double value = 0.0;
  bool ok = true;
};

inline MarginalBounds check_marginal_bounds(const PinnedInstance& p, int u, int c, double value, double tol = 1e-12) {
  const int beta = p.instance().beta;
  const int l = p.list_size(u);
  const int d = p.residual_degree(u);
  MarginalBounds b;
  b.value = value;
  b.lower = std::pow(1.0 - 1.0 / beta, d) / l;
  b.upper = 1.0 / (l - d);
  b.ok = b.lower <= value + tol && value <= b.upper + tol;
  return b;
}

inline MarginalBounds check_marginal_bounds(const PinnedInstance& p, int u, int c, const ExtensionCounter& counter) {
  return check_marginal_bounds(p, u, c, marginal(p, u, c, counter));
}

}  // namespace linecolor
