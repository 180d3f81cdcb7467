#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "linecolor/instance.hpp"
#include "linecolor/specmat.hpp"

namespace linecolor {

using BigInt = boost::multiprecision::cpp_int;

/// Colors grouped by list signature: two colors share a class iff exactly the
/// same vertices list them. Any permutation inside a class is an automorphism
/// of the instance, so such colors are interchangeable until one gets named.
class ColorSymmetry {
 public:
  explicit ColorSymmetry(const ColoringInstance& inst) : class_of_(inst.q + 1, -1) {
    std::map<std::vector<char>, int> ids;
    for (int c = 1; c <= inst.q; ++c) {
      std::vector<char> sig(inst.size());
      for (int v = 0; v < inst.size(); ++v) sig[v] = inst.membership[v][c];
      auto [it, fresh] = ids.emplace(std::move(sig), static_cast<int>(members_.size()));
      if (fresh) members_.emplace_back();
      members_[it->second].push_back(c);
      class_of_[c] = it->second;
    }
  }

  int class_count() const { return static_cast<int>(members_.size()); }
  int class_of(int c) const { return class_of_[c]; }
  const std::vector<int>& members(int k) const { return members_[k]; }
  bool trivial() const { return members_.size() + 1 == class_of_.size(); }

  /// Relabels colors class by class in order of first appearance (pinned
  /// vertices in increasing order, then `extra`), so that every orbit of
  /// (tau, extra) has a single representative.
  PartialColoring canonical(const PartialColoring& tau, std::vector<int>* extra = nullptr) const {
    std::vector<int> map(class_of_.size(), 0);
    std::vector<int> next(members_.size(), 0);
    auto relabel = [&](int c) {
      if (map[c] == 0) map[c] = members_[class_of_[c]][next[class_of_[c]]++];
      return map[c];
    };
    PartialColoring out = tau;
    for (int& c : out.color)
      if (c != 0) c = relabel(c);
    if (extra)
      for (int& c : *extra) c = relabel(c);
    return out;
  }

 private:
  std::vector<int> class_of_;
  std::vector<std::vector<int>> members_;
};

namespace detail {

struct ExtensionClass {
  std::vector<int> colors;  // unnamed members, in order
  int used = 0;
};

template <class Fn>
struct ExtensionWalker {
  const ColoringInstance& inst;
  std::span<const int> order;
  std::vector<int>& color;
  std::vector<int> named;  // sorted
  std::vector<ExtensionClass>& classes;
  const std::vector<int>& class_of;  // color -> index into classes, or -1
  bool symmetric;
  std::uint64_t cap;
  std::uint64_t nodes = 0;
  Fn& fn;

  bool free_of(int v, int c) const {
    for (int w : inst.adjacency[v])
      if (color[w] == c) return false;
    return true;
  }

  void assign(std::size_t t, int v, int c, const BigInt& weight) {
    color[v] = c;
    walk(t + 1, weight);
    color[v] = 0;
  }

  void walk(std::size_t t, const BigInt& weight) {
    if (++nodes > cap) throw CapExceeded("extension enumeration exceeded its node cap");
    if (t == order.size()) {
      fn(static_cast<const std::vector<int>&>(color), weight);
      return;
    }
    const int v = order[t];
    if (!symmetric) {
      for (int c : inst.lists[v])
        if (free_of(v, c)) assign(t, v, c, weight);
      return;
    }
    for (int c : named)
      if (inst.membership[v][c] && free_of(v, c)) assign(t, v, c, weight);
    for (auto& k : classes) {
      if (!inst.membership[v][k.colors[0]]) continue;
      for (int j = 0; j < k.used; ++j)
        if (free_of(v, k.colors[j])) assign(t, v, k.colors[j], weight);
      if (k.used < static_cast<int>(k.colors.size())) {
        const int c = k.colors[k.used];
        const BigInt w = weight * (static_cast<long long>(k.colors.size()) - k.used);
        ++k.used;
        assign(t, v, c, w);
        --k.used;
      }
    }
  }
};

}  // namespace detail

/// Enumerates proper colorings of `vertices` (free in p) extending the pinning.
/// With a symmetry, colors outside col(tau) and `extra_named` are handled by
/// class: one representative per orbit of the class permutations fixing the
/// named colors is visited, with weight equal to the orbit size. Without a
/// symmetry every extension is visited with weight 1. fn receives the full
/// color vector of tau plus the extension.
template <class Fn>
void for_each_extension(const PinnedInstance& p, std::span<const int> vertices,
                        std::span<const int> extra_named, const ColorSymmetry* sym, Fn&& fn,
                        std::uint64_t node_cap = 200'000'000) {
  const ColoringInstance& inst = p.instance();
  for (int v : vertices)
    if (!p.is_free(v)) throw Error("extension vertex is already pinned");
  std::vector<int> color = p.pinning().color;
  std::vector<int> named = p.used_colors();
  named.insert(named.end(), extra_named.begin(), extra_named.end());
  std::sort(named.begin(), named.end());
  named.erase(std::unique(named.begin(), named.end()), named.end());

  std::vector<detail::ExtensionClass> classes;
  std::vector<int> class_of(inst.q + 1, -1);
  if (sym) {
    for (int k = 0; k < sym->class_count(); ++k) {
      detail::ExtensionClass cls;
      for (int c : sym->members(k))
        if (!std::binary_search(named.begin(), named.end(), c)) cls.colors.push_back(c);
      if (cls.colors.empty()) continue;
      for (int c : cls.colors) class_of[c] = static_cast<int>(classes.size());
      classes.push_back(std::move(cls));
    }
  }
  detail::ExtensionWalker<std::remove_reference_t<Fn>> walker{
      inst, vertices, color, named, classes, class_of, sym != nullptr, node_cap, 0, fn};
  walker.walk(0, BigInt(1));
}

inline double to_double_ratio(const BigInt& num, const BigInt& den) {
  if (den == 0) throw Error("ratio with zero denominator");
  if (num == 0) return 0.0;
  const unsigned bits = std::max(boost::multiprecision::msb(num), boost::multiprecision::msb(den));
  if (bits < 53)
    return static_cast<double>(num.convert_to<long long>()) / static_cast<double>(den.convert_to<long long>());
  using Float = boost::multiprecision::cpp_bin_float_50;
  return static_cast<double>(Float(num) / Float(den));
}

/// Orbit representatives of the faces of the complex (proper partial
/// colorings) under the color symmetry, with orbit sizes. Visits faces whose
/// domain has exactly `dimension` vertices, or every dimension when negative.
template <class Fn>
void for_each_face_orbit(const ColoringInstance& inst, const ColorSymmetry* sym, int dimension, Fn&& fn,
                         std::uint64_t node_cap = 200'000'000) {
  const int n = inst.size();
  const PinnedInstance root = pin(inst);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const int d = std::popcount(mask);
    if (dimension >= 0 && d != dimension) continue;
    std::vector<int> domain;
    for (int v = 0; v < n; ++v)
      if (mask & (1u << v)) domain.push_back(v);
    for_each_extension(
        root, domain, {}, sym,
        [&](const std::vector<int>& color, const BigInt& weight) {
          PartialColoring tau(n);
          tau.color = color;
          fn(tau, weight);
        },
        node_cap);
  }
}

/// Reduced index for matrices over C_{tau,1} invariant under the class
/// permutations that fix col(tau) and `extra_named`.
inline ReducedIndex reduced_index(const PinnedInstance& p, const ColorSymmetry* sym,
                                  std::span<const int> extra_named = {}) {
  const ColoringInstance& inst = p.instance();
  std::vector<int> named = p.used_colors();
  named.insert(named.end(), extra_named.begin(), extra_named.end());
  std::sort(named.begin(), named.end());
  named.erase(std::unique(named.begin(), named.end()), named.end());

  ReducedIndex idx;
  std::vector<int> class_id(inst.q + 1, -1);
  if (sym) {
    for (int k = 0; k < sym->class_count(); ++k) {
      std::vector<int> cls;
      for (int c : sym->members(k))
        if (!std::binary_search(named.begin(), named.end(), c)) cls.push_back(c);
      if (cls.empty()) continue;
      for (int c : cls) class_id[c] = static_cast<int>(idx.classes.size());
      idx.classes.push_back(std::move(cls));
    }
  }
  for (int v : p.free_vertices()) {
    for (int c : p.residual_list(v))
      if (class_id[c] < 0) idx.named.push_back({v, c});
    for (std::size_t k = 0; k < idx.classes.size(); ++k)
      if (p.allows(v, idx.classes[k][0])) idx.slots.push_back({v, static_cast<int>(k)});
  }
  return idx;
}

}  // namespace linecolor
