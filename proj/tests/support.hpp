#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linecolor/instance.hpp"
#include "linecolor/symmetry.hpp"

namespace testing_support {

using linecolor::BaseGraph;
using linecolor::ColoringInstance;
using linecolor::PartialColoring;

inline ColoringInstance from_base(std::vector<std::pair<int, int>> edges, int q, int min_beta = 2) {
  int nv = 0;
  for (auto [a, b] : edges) nv = std::max({nv, a + 1, b + 1});
  const auto g = linecolor::line_graph(BaseGraph{nv, std::move(edges)});
  return linecolor::make_instance(g, linecolor::uniform_lists(static_cast<int>(g.adjacency.size()), q), q, min_beta);
}

struct Named {
  std::string name;
  ColoringInstance inst;
};

/// Small line-graph instances with at most six vertices and q <= 8.
inline std::vector<Named> small_instances() {
  return {
      {"K3 (star K1,3), q=6", from_base({{0, 1}, {0, 2}, {0, 3}}, 6)},
      {"P4 (path of 4 edges), q=5", from_base({{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 5)},
      {"C4, q=5", from_base({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 5)},
      {"triangle with pendant, q=6", from_base({{0, 1}, {1, 2}, {2, 0}, {0, 3}}, 6)},
      {"star with tail, q=6", from_base({{0, 1}, {0, 2}, {0, 3}, {3, 4}}, 6)},
      {"K3, q=9", from_base({{0, 1}, {0, 2}, {0, 3}}, 9)},
  };
}

/// Brute-force oracle: every color vector over the full lists, filtered for
/// agreement with tau and properness. Shares no code with the library backends.
inline void for_each_coloring(const ColoringInstance& inst, const PartialColoring& tau,
                              const std::function<void(const std::vector<int>&)>& fn) {
  const int n = inst.size();
  std::vector<int> idx(n, 0);
  std::vector<int> color(n);
  while (true) {
    bool agree = true;
    for (int v = 0; v < n; ++v) {
      color[v] = inst.lists[v][idx[v]];
      if (tau.color[v] != 0 && tau.color[v] != color[v]) agree = false;
    }
    if (agree) {
      bool proper = true;
      for (int v = 0; v < n && proper; ++v)
        for (int w : inst.adjacency[v])
          if (color[v] == color[w]) proper = false;
      if (proper) fn(color);
    }
    int v = 0;
    while (v < n && ++idx[v] == static_cast<int>(inst.lists[v].size())) idx[v++] = 0;
    if (v == n) break;
  }
}

inline std::uint64_t brute_count(const ColoringInstance& inst, const PartialColoring& tau) {
  std::uint64_t c = 0;
  for_each_coloring(inst, tau, [&](const std::vector<int>&) { ++c; });
  return c;
}

inline double brute_marginal(const ColoringInstance& inst, const PartialColoring& tau, int v, int c) {
  std::uint64_t hit = 0, all = 0;
  for_each_coloring(inst, tau, [&](const std::vector<int>& col) {
    ++all;
    hit += col[v] == c;
  });
  return all ? static_cast<double>(hit) / all : 0.0;
}

/// Every proper partial coloring (all pinnings), without symmetry reduction.
inline void for_each_pinning(const ColoringInstance& inst, const std::function<void(const PartialColoring&)>& fn) {
  linecolor::for_each_face_orbit(inst, nullptr, -1,
                                 [&](const PartialColoring& tau, const linecolor::BigInt&) { fn(tau); });
}

}  // namespace testing_support
