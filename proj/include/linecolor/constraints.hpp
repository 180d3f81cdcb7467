#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "linecolor/instance.hpp"

namespace linecolor {

// All logarithms are natural.

enum class SystemKind { b_prime, b_full, combined };

/// Parameters of the coefficient systems. For `combined`, c1 is the quadratic
/// coefficient (4), c2 is C(Delta), c3 the cap on b_h, horizon is Delta and p
/// is beta - 1.
struct ConstraintSystem {
  SystemKind kind = SystemKind::b_prime;
  double c1 = 4.0;
  double c2 = 1.0;
  double c3 = 0.1;
  double alpha = 0.5;
  int horizon = 1;
  double p = 1.0;
};

struct Violation {
  int index = 0;  // h, 1-based
  double slack = 0.0;
  std::string constraint;
};

struct CoefficientSolution {
  std::vector<double> values;  // values[h-1]
  double eta = 0.0;
  bool feasible = false;
  std::vector<Violation> violations;
};

namespace detail {

struct SlackCollector {
  double tol;
  std::vector<Violation> out;
  // lhs >= rhs, compared relative to the size of the terms.
  void geq(int h, double lhs, double rhs, const char* what, double scale) {
    const double slack = lhs - rhs;
    if (!(slack >= -tol * std::max(scale, 1e-300))) out.push_back({h, slack, what});
  }
};

}  // namespace detail

/// Evaluates every inequality of the chosen system literally and returns the
/// violated ones with their signed slacks.
inline std::vector<Violation> check_system(std::span<const double> values, const ConstraintSystem& s,
                                           double tol = 1e-12) {
  const int H = s.horizon;
  if (H < 1) throw Error("horizon must be at least 1");
  const double p2 = s.p * s.p;
  detail::SlackCollector col{tol, {}};
  auto first = [&](double b1) {
    col.geq(1, -std::abs(b1 - 1.0 / p2), 0.0, "b1 = 1/p^2", 1.0 / p2);
  };

  if (s.kind == SystemKind::b_prime) {
    if (static_cast<int>(values.size()) != H) throw Error("value count must equal the horizon");
    first(values[0]);
    for (int h = 2; h <= H; ++h) {
      const double b = values[h - 1];
      const double prev = values[h - 2];
      const double lhs = (h - 1) * (b - prev);
      const double rhs = s.c1 * b * b + s.c2 / p2;
      col.geq(h, lhs, rhs, "step", std::max({std::abs(lhs), rhs, (h - 1) * std::abs(b)}));
    }
  } else if (s.kind == SystemKind::b_full) {
    if (static_cast<int>(values.size()) != H) throw Error("value count must equal the horizon");
    first(values[0]);
    for (int h = 2; h <= H; ++h) {
      const double b = values[h - 1];
      const double prev = values[h - 2];
      const double lhs = (h - 1) * b - h * prev;
      const double rhs = s.c1 * b * b + s.c2 / p2 * std::pow(h, 2.0 * s.alpha);
      col.geq(h, lhs, rhs, "step", std::max({std::abs((h - 1) * b), std::abs(h * prev), rhs}));
    }
    for (int h = 1; h <= H; ++h) col.geq(h, s.c3, values[h - 1], "cap", s.c3);
  } else {
    if (static_cast<int>(values.size()) != 2 * H) throw Error("combined system takes b' then b");
    const auto bp = values.subspan(0, H);
    const auto b = values.subspan(H, H);
    first(bp[0]);
    for (int h = 2; h <= H; ++h) {
      const double lhs = (h - 1) * (bp[h - 1] - bp[h - 2]);
      const double rhs = s.c1 * bp[h - 1] * bp[h - 1] + s.c2 / p2;
      col.geq(h, lhs, rhs, "b' step", std::max({std::abs(lhs), rhs, (h - 1) * bp[h - 1]}));
    }
    for (int h = 1; h <= H; ++h) col.geq(h, b[0], bp[h - 1], "b1 >= b'_h", b[0]);
    for (int h = 2; h <= H; ++h) {
      const double lhs = (h - 1) * b[h - 1] - h * b[h - 2];
      const double rhs = s.c1 * b[h - 1] * b[h - 1] + s.c2 * h / p2;
      col.geq(h, lhs, rhs, "b step", std::max({std::abs((h - 1) * b[h - 1]), std::abs(h * b[h - 2]), rhs}));
    }
    for (int h = 1; h <= H; ++h) col.geq(h, s.c3, b[h - 1], "cap", s.c3);
  }
  return col.out;
}

/// Sufficient p for the b' system: 2 sqrt(2 C1 log H (sqrt(1 + 4 C2^2 log^2 H) + 2 C2 log H)).
inline double bprime_threshold(double c1, double c2, int horizon) {
  const double l = std::log(static_cast<double>(horizon));
  return 2.0 * std::sqrt(2.0 * c1 * l * (std::sqrt(1.0 + 4.0 * c2 * c2 * l * l) + 2.0 * c2 * l));
}

/// Sufficient p for the b system: c H^alpha log^2 H + 2c.
inline double b_threshold(double c1, double c2, double c3, double alpha, int horizon) {
  const double l = std::log(static_cast<double>(horizon));
  const double c = std::max(std::sqrt(8.0 * c1), std::sqrt(2.0 / c3)) * std::sqrt(1.0 + 2.0 * c2);
  return c * std::pow(horizon, alpha) * l * l + 2.0 * c;
}

/// b'_h = (1 + eta log h)/p^2 with eta the smaller root of
/// 4 C1 log^2 H eta^2 - p^2 eta + 2 p^2 C2 + 4 C1 = 0.
inline CoefficientSolution solve_bprime(const ConstraintSystem& s) {
  if (s.kind != SystemKind::b_prime) throw Error("solve_bprime needs a b' system");
  if (s.horizon < 1) throw Error("horizon must be at least 1");
  const int H = s.horizon;
  const double p2 = s.p * s.p;
  CoefficientSolution out;
  if (H == 1) {
    out.values = {1.0 / p2};
    out.violations = check_system(out.values, s);
    out.feasible = out.violations.empty();
    return out;
  }
  const double l = std::log(static_cast<double>(H));
  const double a = 4.0 * s.c1 * l * l;
  const double c = 2.0 * p2 * s.c2 + 4.0 * s.c1;
  const double disc = p2 * p2 - 4.0 * a * c;
  // At the lemma threshold the discriminant vanishes exactly; rounding is judged
  // against the size of its terms.
  const bool has_root = disc >= -1e-12 * p2 * p2;
  // Stable smaller root; without a real root fall back to the vertex of the parabola.
  out.eta = has_root ? 2.0 * c / (p2 + std::sqrt(std::max(0.0, disc))) : p2 / (2.0 * a);
  out.values.resize(H);
  for (int h = 1; h <= H; ++h) out.values[h - 1] = (1.0 + out.eta * std::log(static_cast<double>(h))) / p2;
  out.violations = check_system(out.values, s);
  if (!has_root) out.violations.insert(out.violations.begin(), {0, disc, "discriminant"});
  if (has_root) {
    const double eta_cap = 8.0 * s.c1 / p2 + 4.0 * s.c2;
    if (out.eta > eta_cap * (1.0 + 1e-12)) out.violations.push_back({0, eta_cap - out.eta, "eta bound"});
    const double b_cap = (1.0 + eta_cap * l) / p2;
    if (out.values.back() > b_cap * (1.0 + 1e-12))
      out.violations.push_back({H, b_cap - out.values.back(), "b'_H bound"});
  }
  out.feasible = out.violations.empty();
  return out;
}

/// b_h = (1 + eta H^{2 alpha - 1} log H h log h)/p^2 with eta = 6 + 16 C2.
inline CoefficientSolution solve_b(const ConstraintSystem& s) {
  if (s.kind != SystemKind::b_full) throw Error("solve_b needs a b system");
  if (s.alpha < 0.5 || s.alpha > 1.0) throw Error("alpha must lie in [1/2, 1]");
  if (s.horizon < 1) throw Error("horizon must be at least 1");
  const int H = s.horizon;
  const double p2 = s.p * s.p;
  CoefficientSolution out;
  out.eta = 6.0 + 16.0 * s.c2;
  const double l = std::log(static_cast<double>(H));
  const double coef = out.eta * std::pow(H, 2.0 * s.alpha - 1.0) * l;
  out.values.resize(H);
  for (int h = 1; h <= H; ++h) out.values[h - 1] = (1.0 + coef * h * std::log(static_cast<double>(h))) / p2;
  out.violations = check_system(out.values, s);
  out.feasible = out.violations.empty();
  return out;
}

inline CoefficientSolution solve(const ConstraintSystem& s) {
  return s.kind == SystemKind::b_prime ? solve_bprime(s) : solve_b(s);
}

/// Smallest p in [lo, hi] (to within tol) at which the lemma ansatz passes.
inline double min_p_search(ConstraintSystem s, double lo, double hi, double tol = 1e-6) {
  if (s.kind == SystemKind::combined) throw Error("min_p_search runs on a single lemma system");
  auto feasible = [&](double p) {
    s.p = p;
    return solve(s).feasible;
  };
  if (!feasible(hi)) throw Error("system infeasible at the upper end of the bracket");
  constexpr int samples = 64;
  bool seen_feasible = false;
  for (int t = 0; t <= samples; ++t) {
    const double p = lo + (hi - lo) * t / samples;
    const bool f = feasible(p);
    if (seen_feasible && !f) throw Error("feasibility is not monotone in p on the bracket");
    seen_feasible = seen_feasible || f;
  }
  if (feasible(lo)) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

struct GridCell {
  ConstraintSystem system;  // p holds the closed-form threshold
  double min_p = 0.0;       // bisection on the lemma's own ansatz
  std::size_t violations = 0;  // of the closed-form solution at the threshold
  bool ok() const { return violations == 0 && min_p <= system.p; }
};

/// Both coefficient lemmas over C1 in {1,4,10}, C2 in {1,96,500}, C3 in {1/10,1},
/// alpha in {1/2,3/4,1}, H in {1,2,8,64,1024}. With H = 1 the b' threshold
/// degenerates to 0 and every p > 0 works, so p = 1 stands in for it.
inline std::vector<GridCell> constraint_grid() {
  std::vector<GridCell> out;
  auto run = [&](ConstraintSystem s) {
    GridCell cell;
    cell.violations = check_system(solve(s).values, s).size();
    cell.min_p = min_p_search(s, 1e-3, s.p);
    cell.system = s;
    out.push_back(cell);
  };
  for (double c1 : {1.0, 4.0, 10.0})
    for (double c2 : {1.0, 96.0, 500.0})
      for (int h : {1, 2, 8, 64, 1024}) {
        const double tp = bprime_threshold(c1, c2, h);
        run({SystemKind::b_prime, c1, c2, 0.1, 0.5, h, tp > 0.0 ? tp : 1.0});
        for (double c3 : {0.1, 1.0})
          for (double alpha : {0.5, 0.75, 1.0})
            run({SystemKind::b_full, c1, c2, c3, alpha, h, b_threshold(c1, c2, c3, alpha, h)});
      }
  return out;
}

/// The constraint lines on beta, with iota(Delta) = 1 + 0.1 log Delta unless overridden.
struct BetaThreshold {
  double delta = 0.0;
  double iota = 0.0;
  double c_delta = 0.0;
  double line[4] = {0, 0, 0, 0};
  double heart = 0.0;       // max of the four lines
  double simplified = 0.0;  // max{10D/log D, 416(...)} + 1
  double bprime_exact = 0.0;  // exact b' lemma threshold, shifted by 1
  double bprime_eps0 = 0.0;   // 4 sqrt(2(4 + eps0) C) log D + 1, eps0 = 1e-4
  double required() const { return std::max(heart, simplified); }
};

inline double iota_default(double delta) { return 1.0 + 0.1 * std::log(delta); }

inline double c_of_delta(double iota) { return 96.0 * (1.0 + iota) * iota * std::exp(iota); }

inline double simplified_threshold(double delta) {
  const double l = std::log(delta);
  return std::max(10.0 * delta / l,
                  416.0 * (std::pow(delta, 0.625) * std::pow(l, 2.5) + 2.0 * std::pow(delta, 0.125) * std::sqrt(l))) +
         1.0;
}

inline BetaThreshold beta_threshold(double delta, double iota_override = 0.0) {
  if (delta < 2) throw Error("beta threshold needs Delta >= 2");
  BetaThreshold t;
  t.delta = delta;
  t.iota = iota_override > 0.0 ? iota_override : iota_default(delta);
  t.c_delta = c_of_delta(t.iota);
  const double l = std::log(delta);
  const double c = 4.0 * std::sqrt(2.0 * (1.0 + 2.0 / (5.0 * l)));
  t.line[0] = 21.0;
  t.line[1] = delta / t.iota + 1.0;
  t.line[2] = 4.0 * std::sqrt(10.0 * t.c_delta) * l + 1.0;
  t.line[3] = (c * std::sqrt(delta) * l * l + 2.0 * c) * std::sqrt(5.0 * t.c_delta * l) + 1.0;
  t.heart = *std::max_element(std::begin(t.line), std::end(t.line));
  t.simplified = simplified_threshold(delta);
  t.bprime_exact = bprime_threshold(4.0, t.c_delta, static_cast<int>(delta)) + 1.0;
  t.bprime_eps0 = 4.0 * std::sqrt(2.0 * (4.0 + 1e-4) * t.c_delta) * l + 1.0;
  return t;
}

/// Ratio of the polynomial part of the simplified threshold to Delta/log Delta,
/// as a function of x = log Delta.
inline double headline_ratio(double x) {
  return 416.0 * (std::exp(-0.375 * x) * std::pow(x, 3.5) + 2.0 * std::exp(-0.875 * x) * std::pow(x, 1.5));
}

inline double headline_ratio_slope(double x) {
  return 416.0 * (std::exp(-0.375 * x) * std::pow(x, 2.5) * (3.5 - 0.375 * x) +
                  2.0 * std::exp(-0.875 * x) * std::pow(x, 0.5) * (1.5 - 0.875 * x));
}

struct HeadlineSweep {
  double sup = 0.0;
  double argmax_delta = 1.0;
  bool pass = false;  // sup < 31210
};

/// sup over Delta >= 1 of 416(D^0.625 log^2.5 D + 2 D^0.125 log^0.5 D)/(D/log D):
/// dense grid on log Delta, then a sign change of the slope brackets the interior
/// maximum, which Brent's method refines.
inline HeadlineSweep headline_constant(double x_max = 80.0, double step = 1e-3) {
  HeadlineSweep out;
  double best_x = 0.0;
  double best = headline_ratio(0.0);
  for (double x = step; x <= x_max; x += step) {
    const double f = headline_ratio(x);
    if (f > best) {
      best = f;
      best_x = x;
    }
  }
  double lo = std::max(0.0, best_x - step);
  double hi = best_x + step;
  if (headline_ratio_slope(lo) > 0.0 && headline_ratio_slope(hi) < 0.0) {
    auto r = boost::math::tools::brent_find_minima([](double x) { return -headline_ratio(x); }, lo, hi, 52);
    if (-r.second > best) {
      best = -r.second;
      best_x = r.first;
    }
  }
  out.sup = best;
  out.argmax_delta = std::exp(best_x);
  out.pass = out.sup < 31210.0;
  return out;
}

}  // namespace linecolor
