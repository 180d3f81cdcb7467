#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace linecolor {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an enumeration would exceed its configured budget.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

struct BaseGraph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;
};

/// Line graph of a base graph. Vertex v is the base edge labels[v]; cliques[i]
/// holds the line-graph vertices incident to base vertex i (empty if isolated).
struct LineGraph {
  std::vector<std::vector<int>> adjacency;
  std::vector<std::vector<int>> cliques;
  std::vector<std::pair<int, int>> labels;
};

inline LineGraph line_graph(const BaseGraph& base) {
  if (base.edges.empty()) throw Error("empty line graph");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(base.edges.size());
  for (auto [a, b] : base.edges) {
    if (a < 0 || b < 0 || a >= base.vertex_count || b >= base.vertex_count)
      throw Error("base edge endpoint out of range");
    if (a == b) throw Error("base graph has a self-loop");
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw Error("base graph has a duplicate edge");

  LineGraph g;
  const int n = static_cast<int>(edges.size());
  g.labels = edges;
  g.adjacency.assign(n, {});
  g.cliques.assign(base.vertex_count, {});
  for (int v = 0; v < n; ++v) {
    g.cliques[edges[v].first].push_back(v);
    g.cliques[edges[v].second].push_back(v);
  }
  for (const auto& clique : g.cliques)
    for (int u : clique)
      for (int v : clique)
        if (u != v) g.adjacency[u].push_back(v);
  for (auto& nb : g.adjacency) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

struct ColoringInstance {
  int q = 0;
  int beta = 0;
  int max_degree = 0;
  std::vector<std::vector<int>> adjacency;
  std::vector<std::vector<int>> lists;
  std::vector<std::vector<int>> cliques;     // nonempty cliques only
  std::vector<std::vector<int>> cliques_of;  // clique ids containing each vertex
  std::vector<std::pair<int, int>> labels;   // base edges; empty for explicit graphs
  bool certified = true;  // false when built from an explicit graph and clique cover
  std::vector<std::vector<char>> membership;  // membership[v][c], c in 0..q

  int size() const { return static_cast<int>(adjacency.size()); }
  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
  bool allows(int v, int c) const {
    return c >= 1 && c <= q && membership[v][c] != 0;
  }
  bool adjacent(int u, int v) const {
    return std::binary_search(adjacency[u].begin(), adjacency[u].end(), v);
  }
};

inline std::vector<std::vector<int>> uniform_lists(int n, int q) {
  std::vector<int> all(q);
  std::iota(all.begin(), all.end(), 1);
  return std::vector<std::vector<int>>(n, all);
}

/// Validates the graph, clique cover and lists and computes the slack
/// beta = min_v (|L_v| - deg(v)) - 1. Instances with beta < min_beta are rejected.
inline ColoringInstance make_instance(std::vector<std::vector<int>> adjacency,
                                      std::vector<std::vector<int>> cliques,
                                      std::vector<std::vector<int>> lists, int q,
                                      int min_beta = 2) {
  const int n = static_cast<int>(adjacency.size());
  if (n == 0) throw Error("empty line graph");
  if (static_cast<int>(lists.size()) != n) throw Error("list count does not match vertex count");
  if (q < 1) throw Error("q must be positive");

  for (int v = 0; v < n; ++v) {
    auto& nb = adjacency[v];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (int w : nb) {
      if (w < 0 || w >= n) throw Error("adjacency entry out of range");
      if (w == v) throw Error("graph has a self-loop");
    }
  }
  for (int v = 0; v < n; ++v)
    for (int w : adjacency[v])
      if (!std::binary_search(adjacency[w].begin(), adjacency[w].end(), v))
        throw Error("adjacency is not symmetric");

  ColoringInstance inst;
  inst.q = q;
  inst.adjacency = std::move(adjacency);
  inst.cliques_of.assign(n, {});
  for (auto& clique : cliques) {
    std::sort(clique.begin(), clique.end());
    clique.erase(std::unique(clique.begin(), clique.end()), clique.end());
    if (clique.empty()) continue;
    for (int u : clique) {
      if (u < 0 || u >= n) throw Error("clique vertex out of range");
      for (int v : clique)
        if (u != v && !inst.adjacent(u, v)) throw Error("clique cover entry is not a clique");
    }
    const int id = static_cast<int>(inst.cliques.size());
    for (int u : clique) inst.cliques_of[u].push_back(id);
    inst.cliques.push_back(clique);
  }
  for (int v = 0; v < n; ++v) {
    if (inst.cliques_of[v].empty() || inst.cliques_of[v].size() > 2)
      throw Error("every vertex must lie in one or two cliques");
    for (int w : inst.adjacency[v]) {
      bool covered = false;
      for (int id : inst.cliques_of[v])
        covered = covered || std::binary_search(inst.cliques[id].begin(), inst.cliques[id].end(), w);
      if (!covered) throw Error("edge not covered by the clique cover");
    }
  }

  inst.membership.assign(n, std::vector<char>(q + 1, 0));
  for (int v = 0; v < n; ++v) {
    auto& list = lists[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    if (list.empty()) throw Error("vertex with empty list");
    for (int c : list) {
      if (c < 1 || c > q) throw Error("list color outside 1..q");
      inst.membership[v][c] = 1;
    }
  }
  inst.lists = std::move(lists);

  int slack = inst.q + 1;
  for (int v = 0; v < n; ++v) {
    inst.max_degree = std::max(inst.max_degree, inst.degree(v));
    slack = std::min(slack, static_cast<int>(inst.lists[v].size()) - inst.degree(v));
  }
  inst.beta = slack - 1;
  if (inst.beta < min_beta) throw Error("insufficient slack");
  inst.certified = false;
  return inst;
}

inline ColoringInstance make_instance(const LineGraph& g, std::vector<std::vector<int>> lists, int q,
                                      int min_beta = 2) {
  ColoringInstance inst = make_instance(g.adjacency, g.cliques, std::move(lists), q, min_beta);
  inst.labels = g.labels;
  inst.certified = true;
  return inst;
}

/// A partial coloring; color[v] == 0 means v is unassigned.
struct PartialColoring {
  std::vector<int> color;

  PartialColoring() = default;
  explicit PartialColoring(int n) : color(n, 0) {}

  int size() const { return static_cast<int>(color.size()); }
  bool assigned(int v) const { return color[v] != 0; }
  int operator[](int v) const { return color[v]; }
  int codim() const { return static_cast<int>(std::count(color.begin(), color.end(), 0)); }
  std::vector<int> domain() const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
      if (color[v] != 0) out.push_back(v);
    return out;
  }
  PartialColoring with(int v, int c) const {
    PartialColoring out = *this;
    out.color[v] = c;
    return out;
  }

  auto operator<=>(const PartialColoring&) const = default;
};

inline std::string to_string(const PartialColoring& tau) {
  std::string s = "{";
  bool first = true;
  for (int v = 0; v < tau.size(); ++v) {
    if (!tau.assigned(v)) continue;
    if (!first) s += ", ";
    first = false;
    s += std::to_string(v) + ":" + std::to_string(tau[v]);
  }
  return s + "}";
}

inline bool is_proper(const ColoringInstance& inst, const PartialColoring& tau) {
  if (tau.size() != inst.size()) return false;
  for (int v = 0; v < inst.size(); ++v) {
    if (!tau.assigned(v)) continue;
    if (!inst.allows(v, tau[v])) return false;
    for (int w : inst.adjacency[v])
      if (tau[w] == tau[v]) return false;
  }
  return true;
}

/// The residual list-coloring instance after pinning tau. Holds a pointer to
/// the parent instance, which must outlive it.
class PinnedInstance {
 public:
  PinnedInstance(const ColoringInstance& inst, PartialColoring tau)
      : inst_(&inst), tau_(std::move(tau)) {
    if (!is_proper(inst, tau_)) throw Error("improper pinning");
    const int n = inst.size();
    free_neighbors_.assign(n, {});
    residual_lists_.assign(n, {});
    for (int v = 0; v < n; ++v) {
      if (tau_.assigned(v)) continue;
      free_.push_back(v);
      std::vector<int> blocked;
      for (int w : inst.adjacency[v]) {
        if (tau_.assigned(w))
          blocked.push_back(tau_[w]);
        else
          free_neighbors_[v].push_back(w);
      }
      std::sort(blocked.begin(), blocked.end());
      for (int c : inst.lists[v])
        if (!std::binary_search(blocked.begin(), blocked.end(), c)) residual_lists_[v].push_back(c);
    }
    residual_cliques_.assign(inst.cliques.size(), {});
    for (std::size_t i = 0; i < inst.cliques.size(); ++i)
      for (int v : inst.cliques[i])
        if (!tau_.assigned(v)) residual_cliques_[i].push_back(v);
  }

  const ColoringInstance& instance() const { return *inst_; }
  const PartialColoring& pinning() const { return tau_; }
  const std::vector<int>& free_vertices() const { return free_; }
  int codim() const { return static_cast<int>(free_.size()); }
  bool is_free(int v) const { return !tau_.assigned(v); }

  const std::vector<int>& residual_list(int v) const { return residual_lists_[v]; }
  int list_size(int v) const { return static_cast<int>(residual_lists_[v].size()); }
  bool allows(int v, int c) const {
    return is_free(v) &&
           std::binary_search(residual_lists_[v].begin(), residual_lists_[v].end(), c);
  }
  /// l_uv^tau: number of colors available to both u and v.
  int shared_list_size(int u, int v) const {
    const auto& a = residual_lists_[u];
    const auto& b = residual_lists_[v];
    int count = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++count;
        ++i;
        ++j;
      }
    }
    return count;
  }
  const std::vector<int>& free_neighbors(int v) const { return free_neighbors_[v]; }
  int residual_degree(int v) const { return static_cast<int>(free_neighbors_[v].size()); }

  int clique_count() const { return static_cast<int>(residual_cliques_.size()); }
  /// V_tau^i.
  const std::vector<int>& residual_clique(int i) const { return residual_cliques_[i]; }
  /// |V_tau^i| - 1, the index used for the a_h coefficients.
  int clique_h(int i) const { return static_cast<int>(residual_cliques_[i].size()) - 1; }
  /// V_tau^{i,c}: free clique members that can still take c.
  std::vector<int> color_clique(int i, int c) const {
    std::vector<int> out;
    for (int v : residual_cliques_[i])
      if (allows(v, c)) out.push_back(v);
    return out;
  }
  int h(int i, int c) const { return static_cast<int>(color_clique(i, c).size()) - 1; }

  std::vector<int> used_colors() const {
    std::vector<int> out;
    for (int c : tau_.color)
      if (c != 0) out.push_back(c);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Connected components of G_tau, each sorted, ordered by smallest vertex.
  std::vector<std::vector<int>> components() const {
    std::vector<std::vector<int>> out;
    std::vector<char> seen(inst_->size(), 0);
    for (int s : free_) {
      if (seen[s]) continue;
      std::vector<int> comp{s};
      seen[s] = 1;
      for (std::size_t k = 0; k < comp.size(); ++k)
        for (int w : free_neighbors_[comp[k]])
          if (!seen[w]) {
            seen[w] = 1;
            comp.push_back(w);
          }
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
    return out;
  }
  bool connected() const { return components().size() <= 1; }

 private:
  const ColoringInstance* inst_;
  PartialColoring tau_;
  std::vector<int> free_;
  std::vector<std::vector<int>> free_neighbors_;
  std::vector<std::vector<int>> residual_lists_;
  std::vector<std::vector<int>> residual_cliques_;
};

inline PinnedInstance pin(const ColoringInstance& inst, const PartialColoring& tau) {
  return PinnedInstance(inst, tau);
}

inline PinnedInstance pin(const ColoringInstance& inst) {
  return PinnedInstance(inst, PartialColoring(inst.size()));
}

/// Pins tau together with the assignments of more (which must be disjoint).
inline PinnedInstance extend(const PinnedInstance& p, const PartialColoring& more) {
  PartialColoring tau = p.pinning();
  for (int v = 0; v < more.size(); ++v) {
    if (!more.assigned(v)) continue;
    if (tau.assigned(v) && tau[v] != more[v]) throw Error("improper pinning");
    tau.color[v] = more[v];
  }
  return PinnedInstance(p.instance(), std::move(tau));
}

inline PinnedInstance extend(const PinnedInstance& p, int v, int c) {
  return PinnedInstance(p.instance(), p.pinning().with(v, c));
}

}  // namespace linecolor
