#include <gtest/gtest.h>

#include <chrono>

#include "linecolor/constraints.hpp"

using namespace linecolor;

TEST(BPrime, FeasibleAtThreshold) {
  for (double c1 : {1.0, 4.0, 10.0})
    for (double c2 : {1.0, 96.0})
      for (int h : {2, 8, 64}) {
        ConstraintSystem s{SystemKind::b_prime, c1, c2, 0.1, 0.5, h, bprime_threshold(c1, c2, h)};
        const CoefficientSolution sol = solve_bprime(s);
        EXPECT_TRUE(sol.feasible) << c1 << ' ' << c2 << ' ' << h;
        EXPECT_TRUE(check_system(sol.values, s).empty());
        EXPECT_NEAR(sol.values[0], 1.0 / (s.p * s.p), 1e-18);
      }
}

TEST(BPrime, BelowThresholdHasNoRoot) {
  ConstraintSystem s{SystemKind::b_prime, 4.0, 96.0, 0.1, 0.5, 8, 0.0};
  s.p = 0.5 * bprime_threshold(4.0, 96.0, 8);
  const CoefficientSolution sol = solve_bprime(s);
  EXPECT_FALSE(sol.feasible);
  ASSERT_FALSE(sol.violations.empty());
  EXPECT_EQ(sol.violations.front().constraint, "discriminant");
}

TEST(BFull, HorizonOneNeedsSqrtTen) {
  // H = 1, C3 = 1/10: b_1 = 1/p^2 <= 1/10 iff p >= sqrt 10.
  ConstraintSystem s{SystemKind::b_full, 4.0, 96.0, 0.1, 0.5, 1, std::sqrt(10.0) * (1 + 1e-12)};
  EXPECT_TRUE(solve_b(s).feasible);
  s.p = std::sqrt(10.0) * (1 - 1e-6);
  EXPECT_FALSE(solve_b(s).feasible);
  s.p = 100.0;
  EXPECT_NEAR(min_p_search(s, 1e-3, s.p, 1e-9), std::sqrt(10.0), 1e-8);
}

TEST(BFull, FeasibleAtThreshold) {
  for (double alpha : {0.5, 0.75, 1.0})
    for (int h : {2, 8, 64, 1024}) {
      ConstraintSystem s{SystemKind::b_full, 4.0, 96.0, 0.1, alpha, h, b_threshold(4.0, 96.0, 0.1, alpha, h)};
      EXPECT_TRUE(solve_b(s).feasible) << alpha << ' ' << h;
    }
}

TEST(CheckSystem, ReportsSlack) {
  ConstraintSystem s{SystemKind::b_prime, 4.0, 1.0, 0.1, 0.5, 3, 10.0};
  const std::vector<double> bad{0.01, 0.01, 0.01};  // flat: every step inequality fails
  const auto v = check_system(bad, s);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].index, 2);
  EXPECT_LT(v[0].slack, 0.0);
  EXPECT_THROW(check_system(std::vector<double>{0.01}, s), Error);
}

TEST(Grid, EveryCellPasses) {
  const auto grid = constraint_grid();
  EXPECT_EQ(grid.size(), 3u * 3 * 5 * 7);
  for (const auto& g : grid)
    EXPECT_TRUE(g.ok()) << static_cast<int>(g.system.kind) << ' ' << g.system.c1 << ' ' << g.system.c2 << ' '
                        << g.system.horizon << ' ' << g.min_p << " vs " << g.system.p;
}

TEST(Threshold, SimplifiedDominatesHeart) {
  for (int d = 2; d <= 100000; ++d) {
    const BetaThreshold t = beta_threshold(d);
    ASSERT_GE(t.simplified, t.heart) << d;
  }
}

TEST(Threshold, DeltaTwo) {
  // Independent evaluation of max{10D/log D, 416(D^0.625 log^2.5 D + 2 D^0.125 log^0.5 D)} + 1 at D = 2.
  const double l = 0.69314718055994530942;
  const double poly = 416.0 * (1.5422108254079407 * std::pow(l, 2.5) + 2.0 * 1.0905077326652577 * std::sqrt(l));
  const double expect = std::max(20.0 / l, poly) + 1.0;
  const BetaThreshold t = beta_threshold(2);
  EXPECT_NEAR(t.simplified, expect, 1e-9);
  EXPECT_GT(t.simplified, t.heart);
  EXPECT_NEAR(t.iota, 1.0 + 0.1 * l, 1e-15);
}

TEST(Headline, BelowConstantQuickly) {
  const auto t0 = std::chrono::steady_clock::now();
  const HeadlineSweep s = headline_constant();
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(s.pass);
  EXPECT_LT(s.sup, 31210.0);
  EXPECT_GT(s.sup, 31000.0);
  EXPECT_LT(dt, 5.0);
}
