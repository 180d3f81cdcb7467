#include <gtest/gtest.h>

#include "linecolor/certificate.hpp"
#include "support.hpp"

using namespace linecolor;
using namespace testing_support;

TEST(Schedule, Coefficients) {
  const CertificateSchedule s = build_schedule(4, 400, 0.0, ScheduleMode::permissive);
  EXPECT_EQ(s.a_of(0), 0.0);
  EXPECT_EQ(s.a_of(1), 1.0);
  const double iota = 1.0 + 0.1 * std::log(4.0);
  EXPECT_NEAR(s.iota, iota, 1e-15);
  const double gamma = 2.0 * (1.0 + iota) * std::exp(iota) / 399.0;
  for (int h = 1; h <= 4; ++h) EXPECT_NEAR(s.a_of(h), 1.0 / (1.0 + 4.0 * gamma * (h - 1)), 1e-15);
  EXPECT_NEAR(s.bp(1), 1.0 / (399.0 * 399.0), 1e-20);
  const double c = 96.0 * (1.0 + iota) * iota * std::exp(iota);
  EXPECT_NEAR(s.c_delta, c, 1e-9);
  EXPECT_NEAR(s.bh(1), 5.0 * c * std::log(4.0) / (399.0 * 399.0), 1e-15);
  EXPECT_NEAR(s.bh(3), b_closed_form(c, 4, 400, 3), 1e-15);
  EXPECT_GT(b_closed_form(c, 4, 400, 3), b_closed_form_unscaled(c, 4, 400, 3));
  EXPECT_THROW(s.a_of(5), Error);
}

TEST(Schedule, StrictModeAndDeltaOne) {
  EXPECT_THROW(build_schedule(2, 10), Error);
  EXPECT_THROW(build_schedule(2, 1, 0.0, ScheduleMode::permissive), Error);
  const CertificateSchedule one = build_schedule(1, 30);
  EXPECT_EQ(one.bh(1), one.bp(1));
}

TEST(Schedule, HeartAtDeltaTwo) {
  const BetaThreshold t = beta_threshold(2);
  const int beta = static_cast<int>(std::ceil(t.required()));
  const CertificateSchedule s = build_schedule(2, beta);
  EXPECT_TRUE(s.heart);
  EXPECT_TRUE(s.simplified);
  EXPECT_FALSE(build_schedule(2, 100).heart);
}

TEST(BaseCase, MatchesHandFormula) {
  // Free edge u - v after pinning the third triangle vertex; q = 6.
  const auto inst = from_base({{0, 1}, {0, 2}, {0, 3}}, 6);
  PartialColoring tau(3);
  tau.color[2] = 6;
  const PinnedInstance p(inst, tau);
  const double lu = 5, lv = 5, luv = 5, d = lu * lv - luv;
  const int beta = inst.beta;
  const ColorBlock b = base_case_block(p, 1, beta);
  ASSERT_EQ(b.vertices.size(), 2u);
  EXPECT_NEAR(b.m(0, 1), -1.0 / (2 * d), 1e-15);
  EXPECT_NEAR(b.m(0, 0), 0.5 * (lv - 1) / d / ((beta - 1.0) * (beta - 1.0)), 1e-15);
  EXPECT_EQ(base_case_block(p, 6, beta).vertices.size(), 0u);
}

TEST(BaseCase, LowerBoundDense) {
  // Independent assembly: dense Pi P - 2 pi pi^T from the local walk against M.
  for (const auto& [name, inst] : small_instances()) {
    const ExtensionCounter counter(inst);
    const CertificateSchedule sched = build_schedule(inst.max_degree, inst.beta, 0.0, ScheduleMode::permissive);
    const CertificateEngine engine(inst, sched, counter);
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      if (p.codim() != 2) return;
      const LocalWalk w = local_walk(p);
      const LabeledMatrix m = engine.certificate_matrix(p);
      const LabeledMatrix mw = m.embedded(w.index);  // reorders into the walk's labels
      const Eigen::MatrixXd lhs = w.pi_p - 2.0 * w.pi * w.pi.transpose();
      EXPECT_TRUE(loewner_leq(lhs, mw.data).pass) << name << ' ' << to_string(tau);
      EXPECT_TRUE(engine.verify_base(p).lower.pass);
    });
  }
}

TEST(BaseCase, UpperBoundNeedsSlack) {
  // The diagonal of M is Pi/(beta-1)^2, so M <= Pi/5 fails when (beta-1)^2 < 5.
  const auto tight = from_base({{0, 1}, {0, 2}, {0, 3}}, 5);  // beta = 2
  const auto roomy = from_base({{0, 1}, {0, 2}, {0, 3}}, 9);  // beta = 6
  for (const auto* inst : {&tight, &roomy}) {
    const ExtensionCounter counter(*inst);
    const CertificateEngine engine(*inst, build_schedule(2, inst->beta, 0.0, ScheduleMode::permissive), counter);
    PartialColoring tau(3);
    tau.color[0] = 1;
    const BaseReport r = engine.verify_base(PinnedInstance(*inst, tau));
    EXPECT_TRUE(r.lower.pass);
    EXPECT_EQ(r.upper.pass, inst->beta >= 6);
  }
}

TEST(AMatrix, CodimTwoIsBaseOffDiagonal) {
  const auto inst = from_base({{0, 1}, {0, 2}, {0, 3}}, 6);
  const ExtensionCounter counter(inst);
  const CertificateSchedule sched = build_schedule(2, inst.beta, 0.0, ScheduleMode::permissive);
  PartialColoring tau(3);
  tau.color[2] = 6;
  const PinnedInstance p(inst, tau);
  for (int c = 1; c <= 5; ++c) {
    const ColorBlock a = a_matrix(p, 0, c, sched, counter, &counter.symmetry());
    const ColorBlock b = base_case_block(p, c, inst.beta);
    EXPECT_NEAR(a.m(0, 1), b.m(0, 1), 1e-15);
    EXPECT_EQ(a.m(0, 0), 0.0);
  }
}

TEST(AMatrix, DualConstructionsAndIdentities) {
  for (const auto& [name, inst] : small_instances()) {
    const ExtensionCounter counter(inst);
    const CertificateSchedule sched = build_schedule(inst.max_degree, inst.beta, 0.0, ScheduleMode::permissive);
    const ColorSymmetry* sym = &counter.symmetry();
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      if (p.codim() < 2) return;
      for (int i = 0; i < p.clique_count(); ++i)
        for (int c = 1; c <= inst.q; ++c) {
          if (p.color_clique(i, c).size() < 2) continue;
          const ColorBlock a = a_matrix(p, i, c, sched, counter, sym);
          const ColorBlock r = a_matrix_recursive(p, i, c, sched, counter, nullptr);
          EXPECT_LE(max_abs(a.m - r.m), 1e-10) << name << ' ' << to_string(tau) << ' ' << c;
          bool remainder_ok = false;
          EXPECT_TRUE(xi_sum_check(p, i, c, counter, sym, 1e-10, &remainder_ok).pass);
          EXPECT_TRUE(remainder_ok) << name;
          if (p.codim() >= 3 && p.clique_h(i) >= 1)
            EXPECT_TRUE(expectation_identity(p, i, c, sched, counter, sym).pass) << name;
        }
    });
  }
}

TEST(Verify, FeasibleTriangle) {
  const int beta = static_cast<int>(std::ceil(beta_threshold(2).required()));
  const auto inst = from_base({{0, 1}, {0, 2}, {0, 3}}, beta + 3);
  const ExtensionCounter counter(inst);
  const CertificateEngine engine(inst, build_schedule(2, inst.beta), counter);
  const VerifyResult r = engine.verify_all();
  EXPECT_TRUE(r.checks_pass);
  EXPECT_TRUE(r.conclusion_pass);
  EXPECT_TRUE(r.mains_pass);
  EXPECT_EQ(r.first_failure, -1);
}

TEST(Verify, SmallSlackFails) {
  const auto inst = from_base({{0, 1}, {0, 2}, {0, 3}, {3, 4}}, 6);  // Delta = 3, beta = 2
  ASSERT_EQ(inst.beta, 2);
  const ExtensionCounter counter(inst);
  const CertificateEngine engine(inst, build_schedule(3, 2, 0.0, ScheduleMode::permissive), counter);
  const VerifyResult r = engine.verify_all();
  EXPECT_FALSE(r.checks_pass);
  ASSERT_GE(r.first_failure, 0);
  EXPECT_FALSE(r.faces[r.first_failure].checks_pass);
}

TEST(Verify, SymmetryAgreesWithPlainEnumeration) {
  const auto inst = from_base({{0, 1}, {1, 2}, {2, 3}}, 7);
  const ExtensionCounter counter(inst);
  const CertificateSchedule sched = build_schedule(2, inst.beta, 0.0, ScheduleMode::permissive);
  CertificateOptions plain;
  plain.use_symmetry = false;
  const CertificateEngine a(inst, sched, counter);
  const CertificateEngine b(inst, sched, counter, plain);
  PartialColoring tau(3);
  const PinnedInstance p(inst, tau);
  EXPECT_NEAR(a.spectral_conclusion(p).lambda1, b.spectral_conclusion(p).lambda1, 1e-10);
  EXPECT_LE(max_abs(a.certificate_matrix(p).data - b.certificate_matrix(p).data), 1e-12);
}
