#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "linecolor/counting.hpp"
#include "linecolor/instance.hpp"
#include "linecolor/parallel.hpp"
#include "linecolor/specmat.hpp"
#include "linecolor/symmetry.hpp"

namespace linecolor {

/// Colors of v's list not taken by any neighbor under `color` (v's own color included).
inline std::vector<int> available_colors(const ColoringInstance& inst, const std::vector<int>& color, int v) {
  std::vector<int> out;
  for (int c : inst.lists[v]) {
    bool blocked = false;
    for (int w : inst.adjacency[v]) blocked = blocked || color[w] == c;
    if (!blocked) out.push_back(c);
  }
  return out;
}

/// Glauber dynamics over all proper colorings. Entries are kept both exactly,
/// as rationals 1/(n |A_v|) summed per target, and as a sparse double matrix.
struct GlauberChain {
  std::vector<std::vector<int>> states;
  std::vector<std::vector<std::pair<int, BigRational>>> exact;  // sorted by target
  Eigen::SparseMatrix<double, Eigen::RowMajor> p;

  int size() const { return static_cast<int>(states.size()); }
  double at(int i, int j) const { return p.coeff(i, j); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(p); }

  bool rows_sum_to_one() const {
    for (const auto& row : exact) {
      BigRational s = 0;
      for (const auto& e : row) s += e.second;
      if (s != 1) return false;
    }
    return true;
  }
  /// pi(x) P(x,y) = pi(y) P(y,x) with pi uniform, compared as rationals.
  bool detailed_balance() const {
    for (int i = 0; i < size(); ++i)
      for (const auto& [j, value] : exact[i]) {
        const auto& back = exact[j];
        auto it = std::lower_bound(back.begin(), back.end(), i, [](const auto& e, int k) { return e.first < k; });
        if (it == back.end() || it->first != i || it->second != value) return false;
      }
    return true;
  }
  /// max_y |(u P)(y) - u(y)| for the uniform vector u.
  double stationarity_error() const {
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(size(), 1.0 / size());
    const Eigen::VectorXd up = p.transpose() * u;
    return (up - u).cwiseAbs().maxCoeff();
  }
};

inline GlauberChain glauber_matrix(const ColoringInstance& inst, std::size_t facet_cap = 10'000) {
  GlauberChain chain;
  const PinnedInstance root = pin(inst);
  try {
    for_each_extension(
        root, root.free_vertices(), {}, nullptr,
        [&](const std::vector<int>& color, const BigInt&) {
          if (chain.states.size() >= facet_cap) throw CapExceeded("facet cap");
          chain.states.push_back(color);
        },
        static_cast<std::uint64_t>(facet_cap) * 64 + 1024);
  } catch (const CapExceeded&) {
    throw CapExceeded("more than " + std::to_string(facet_cap) + " facets; use simulate instead");
  }
  if (chain.states.empty()) throw Error("instance has no proper coloring");
  std::sort(chain.states.begin(), chain.states.end());
  std::map<std::vector<int>, int> where;
  for (int i = 0; i < chain.size(); ++i) where.emplace(chain.states[i], i);

  const int n = inst.size();
  chain.exact.resize(chain.states.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < chain.size(); ++i) {
    std::map<int, BigRational> row;
    std::vector<int> sigma = chain.states[i];
    for (int v = 0; v < n; ++v) {
      const std::vector<int> avail = available_colors(inst, sigma, v);
      const BigRational w(BigInt(1), BigInt(n) * static_cast<long long>(avail.size()));
      const int keep = sigma[v];
      for (int c : avail) {
        sigma[v] = c;
        row[where.at(sigma)] += w;
      }
      sigma[v] = keep;
    }
    for (auto& [j, value] : row) {
      trip.emplace_back(i, j, static_cast<double>(value));
      chain.exact[i].emplace_back(j, value);
    }
  }
  chain.p.resize(chain.size(), chain.size());
  chain.p.setFromTriplets(trip.begin(), trip.end());
  return chain;
}

struct GapReport {
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  double gap = 0.0;
  double absolute_gap = 0.0;
  bool nonnegative = true;  // every eigenvalue >= -1e-9
};

/// The chain is reversible for the uniform distribution, so P is symmetric.
inline GapReport spectral_gap(const GlauberChain& chain, std::size_t dense_cap = 6000) {
  if (static_cast<std::size_t>(chain.size()) > dense_cap) throw CapExceeded("chain too large for a dense eigensolve");
  GapReport r;
  if (chain.size() == 1) {
    r.lambda2 = r.lambda_min = 0.0;
    r.gap = r.absolute_gap = 1.0;
    return r;
  }
  const Eigen::MatrixXd d = chain.dense();
  const Eigen::VectorXd ev = symmetric_eigenvalues(0.5 * (d + d.transpose()));
  const Eigen::Index m = ev.size();
  r.lambda2 = ev(m - 2);
  r.lambda_min = ev(0);
  r.gap = 1.0 - r.lambda2;
  r.absolute_gap = 1.0 - std::max(std::abs(r.lambda2), std::abs(r.lambda_min));
  r.nonnegative = r.lambda_min >= -1e-9;
  return r;
}

struct MixingReport {
  double eps = 0.25;
  int facets = 0;
  double spectral_gap = 0.0;
  double absolute_gap = 0.0;
  double lambda_min = 0.0;
  std::vector<std::pair<int, double>> tv_curve;  // (t, worst-case TV), t = 0..t_mix
  int t_mix_measured = 0;
  double t_mix_bound = 0.0;
  bool sampled_starts = false;  // true when only a subset of point masses was tried
  bool within_bound() const { return t_mix_measured <= t_mix_bound; }
};

inline double t_mix_bound(double absolute_gap, double pi_min, double eps) {
  if (absolute_gap <= 0.0) return std::numeric_limits<double>::infinity();
  return (0.5 * std::log(1.0 / pi_min) + std::log(1.0 / (2.0 * eps))) / absolute_gap;
}

namespace detail {

// Worst TV to uniform over the point masses at rows `starts`, for t = 0..t_end,
// or until it drops to eps when t_end < 0. Returns the curve.
inline std::vector<double> tv_batch(const GlauberChain& chain, const std::vector<int>& starts, double eps, int t_end,
                                    int t_max) {
  const int n = chain.size();
  const double u = 1.0 / n;
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(starts.size()), n);
  for (std::size_t r = 0; r < starts.size(); ++r) mu(static_cast<Eigen::Index>(r), starts[r]) = 1.0;
  auto worst = [&] { return 0.5 * (mu.array() - u).abs().rowwise().sum().maxCoeff(); };
  std::vector<double> curve{worst()};
  for (int t = 1;; ++t) {
    if (t_end >= 0 && t > t_end) break;
    if (t_end < 0 && t > 1 && curve.back() <= eps) break;
    if (t > t_max) throw Error("chain did not mix within " + std::to_string(t_max) + " steps");
    mu = mu * chain.p;
    curve.push_back(worst());
  }
  return curve;
}

}  // namespace detail

/// Exact worst-case TV curve over point-mass starts. Starts are processed in
/// batches; a first pass finds t_mix, a second evaluates every batch up to it.
inline MixingReport mixing_time_exact(const GlauberChain& chain, double eps, std::size_t start_cap = 10'000,
                                      int t_max = 1'000'000, unsigned threads = 0) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("eps must lie in (0, 1)");
  MixingReport r;
  r.eps = eps;
  r.facets = chain.size();
  const GapReport g = spectral_gap(chain);
  r.spectral_gap = g.gap;
  r.absolute_gap = g.absolute_gap;
  r.lambda_min = g.lambda_min;
  r.t_mix_bound = t_mix_bound(g.absolute_gap, 1.0 / chain.size(), eps);

  std::vector<int> starts;
  if (static_cast<std::size_t>(chain.size()) <= start_cap) {
    for (int i = 0; i < chain.size(); ++i) starts.push_back(i);
  } else {
    r.sampled_starts = true;
    const double stride = static_cast<double>(chain.size()) / start_cap;
    for (std::size_t k = 0; k < start_cap; ++k) starts.push_back(static_cast<int>(k * stride));
  }
  const std::size_t batch = std::max<std::size_t>(1, std::min<std::size_t>(256, (1u << 22) / chain.size()));
  std::vector<std::vector<int>> batches;
  for (std::size_t s = 0; s < starts.size(); s += batch)
    batches.emplace_back(starts.begin() + s, starts.begin() + std::min(starts.size(), s + batch));

  std::vector<int> stop(batches.size());
  parallel_for(
      batches.size(),
      [&](std::size_t b) { stop[b] = static_cast<int>(detail::tv_batch(chain, batches[b], eps, -1, t_max).size()) - 1; },
      threads);
  const int t_mix = *std::max_element(stop.begin(), stop.end());
  std::vector<std::vector<double>> curves(batches.size());
  parallel_for(
      batches.size(), [&](std::size_t b) { curves[b] = detail::tv_batch(chain, batches[b], eps, t_mix, t_max); },
      threads);
  for (int t = 0; t <= t_mix; ++t) {
    double d = 0.0;
    for (const auto& c : curves) d = std::max(d, c[t]);
    r.tv_curve.emplace_back(t, d);
  }
  r.t_mix_measured = t_mix;
  return r;
}

// ---------------------------------------------------------------------------
// Simulation. Every random draw is a hash of (seed, chain, step, draw), so
// trajectories do not depend on thread scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_word(std::uint64_t seed, std::uint64_t chain, std::uint64_t step, std::uint64_t draw) {
  return splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ chain) ^ step) ^ draw);
}

inline std::uint64_t bounded(std::uint64_t word, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word) * m) >> 64);
}

/// Greedy list coloring in vertex order.
inline std::vector<int> greedy_coloring(const ColoringInstance& inst) {
  std::vector<int> color(inst.size(), 0);
  for (int v = 0; v < inst.size(); ++v) {
    const std::vector<int> avail = available_colors(inst, color, v);
    if (avail.empty()) throw Error("greedy coloring failed at vertex " + std::to_string(v));
    color[v] = avail.front();
  }
  return color;
}

struct SimulationConfig {
  std::uint64_t steps = 100'000;
  std::uint64_t seed = 1;
  int chains = 1;
  std::uint64_t thin = 1;
  bool keep_trajectory = false;
  unsigned threads = 0;
};

struct ChainRun {
  std::vector<int> initial;
  std::vector<int> final;
  std::uint64_t moves = 0;  // steps that changed the color
  std::uint64_t samples = 0;
  std::vector<std::vector<std::uint64_t>> counts;  // [v][c]
  std::vector<std::pair<std::uint64_t, std::vector<int>>> trajectory;
};

struct SimulationResult {
  SimulationConfig config;
  std::vector<ChainRun> chains;

  std::uint64_t samples() const {
    std::uint64_t s = 0;
    for (const auto& c : chains) s += c.samples;
    return s;
  }
  double acceptance() const {
    std::uint64_t m = 0;
    for (const auto& c : chains) m += c.moves;
    return static_cast<double>(m) / (static_cast<double>(config.steps) * chains.size());
  }
  /// Pooled empirical frequency of v colored c.
  double marginal(int v, int c) const {
    std::uint64_t hit = 0;
    for (const auto& ch : chains) hit += ch.counts[v][c];
    return static_cast<double>(hit) / samples();
  }
};

inline ChainRun run_chain(const ColoringInstance& inst, const SimulationConfig& cfg, std::uint64_t id) {
  ChainRun run;
  std::vector<int> sigma = greedy_coloring(inst);
  run.initial = sigma;
  const int n = inst.size();
  run.counts.assign(n, std::vector<std::uint64_t>(inst.q + 1, 0));
  const std::uint64_t thin = std::max<std::uint64_t>(1, cfg.thin);
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const int v = static_cast<int>(bounded(stream_word(cfg.seed, id, t, 0), n));
    const std::vector<int> avail = available_colors(inst, sigma, v);
    const int c = avail[bounded(stream_word(cfg.seed, id, t, 1), avail.size())];
    if (c != sigma[v]) ++run.moves;
    sigma[v] = c;
    if ((t + 1) % thin == 0) {
      ++run.samples;
      for (int w = 0; w < n; ++w) ++run.counts[w][sigma[w]];
      if (cfg.keep_trajectory) run.trajectory.emplace_back(t + 1, sigma);
    }
  }
  run.final = sigma;
  return run;
}

inline SimulationResult simulate(const ColoringInstance& inst, const SimulationConfig& cfg) {
  if (cfg.chains < 1) throw Error("need at least one chain");
  SimulationResult res;
  res.config = cfg;
  res.chains.resize(cfg.chains);
  parallel_for(
      res.chains.size(), [&](std::size_t k) { res.chains[k] = run_chain(inst, cfg, k); }, cfg.threads);
  return res;
}

struct MarginalComparison {
  int vertex = 0;
  int color = 0;
  double exact = 0.0;
  double empirical = 0.0;
  double sigma = 0.0;  // binomial standard error over the pooled samples
  bool within(double k) const { return std::abs(empirical - exact) <= k * sigma + 1e-15; }
};

inline std::vector<MarginalComparison> compare_marginals(const ColoringInstance& inst, const SimulationResult& sim,
                                                         const ExtensionCounter& counter) {
  std::vector<MarginalComparison> out;
  const PinnedInstance root = pin(inst);
  const double n = static_cast<double>(sim.samples());
  for (int v = 0; v < inst.size(); ++v)
    for (int c : inst.lists[v]) {
      MarginalComparison m{v, c, marginal(root, v, c, counter), sim.marginal(v, c)};
      m.sigma = std::sqrt(m.exact * (1.0 - m.exact) / n);
      out.push_back(m);
    }
  return out;
}

inline void write_tv_csv(std::ostream& os, const MixingReport& r) {
  os << "t,tv\n";
  os.precision(17);
  for (const auto& [t, d] : r.tv_curve) os << t << ',' << d << '\n';
}

inline void write_marginals_csv(std::ostream& os, const SimulationResult& sim) {
  os << "vertex,color,frequency,samples\n";
  os.precision(17);
  if (sim.chains.empty()) return;
  const auto& counts = sim.chains.front().counts;
  for (std::size_t v = 0; v < counts.size(); ++v)
    for (std::size_t c = 1; c < counts[v].size(); ++c) {
      std::uint64_t hit = 0;
      for (const auto& ch : sim.chains) hit += ch.counts[v][c];
      if (hit == 0) continue;
      os << v << ',' << c << ',' << static_cast<double>(hit) / sim.samples() << ',' << sim.samples() << '\n';
    }
}

inline void write_trajectory_csv(std::ostream& os, const SimulationResult& sim) {
  os << "chain,step,coloring\n";
  for (std::size_t k = 0; k < sim.chains.size(); ++k)
    for (const auto& [t, sigma] : sim.chains[k].trajectory) {
      os << k << ',' << t << ',';
      for (std::size_t v = 0; v < sigma.size(); ++v) os << (v ? " " : "") << sigma[v];
      os << '\n';
    }
}

}  // namespace linecolor
