#include <gtest/gtest.h>

#include "linecolor/lemmas.hpp"
#include "linecolor/specmat.hpp"

using namespace linecolor;

TEST(Loewner, Examples) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 4);
  const Eigen::MatrixXd s = a + a.transpose();
  const LoewnerReport self = loewner_leq(s, s);
  EXPECT_TRUE(self.pass);
  EXPECT_EQ(self.min_eig_diff, 0.0);

  EXPECT_TRUE(loewner_leq(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix(),
                          Eigen::Vector2d(2, 2).asDiagonal().toDenseMatrix())
                  .pass);
  Eigen::Matrix2d swap;
  swap << 0, 1, 1, 0;
  const LoewnerReport r = loewner_leq(swap, Eigen::Matrix2d::Identity());
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.min_eig_diff, 0.0, 1e-15);
  EXPECT_FALSE(loewner_leq(Eigen::Matrix2d::Identity(), swap).pass);
}

TEST(Loewner, ErrorsAndTolerance) {
  Eigen::Matrix2d asym;
  asym << 0, 1, 0, 0;
  EXPECT_THROW(loewner_leq(asym, Eigen::Matrix2d::Zero()), Error);
  EXPECT_THROW(loewner_leq(Eigen::Matrix2d::Zero(), Eigen::Matrix3d::Zero()), Error);
  // Tolerance is relative to max(1, max |B - A|).
  const Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  EXPECT_TRUE(loewner_leq(zero, Eigen::Vector2d(1.0, -5e-10).asDiagonal().toDenseMatrix()).pass);
  EXPECT_FALSE(loewner_leq(zero, Eigen::Vector2d(1.0, -2e-9).asDiagonal().toDenseMatrix()).pass);
  EXPECT_TRUE(loewner_leq(zero, Eigen::Vector2d(1e4, -5e-6).asDiagonal().toDenseMatrix()).pass);
}

TEST(PseudoInverse, Examples) {
  const Eigen::VectorXd d = Eigen::Vector2d(4.0, 0.0);
  EXPECT_EQ(pinv_diag(d), Eigen::Vector2d(0.25, 0.0));
  EXPECT_EQ(pinv_sqrt(d), Eigen::Vector2d(0.5, 0.0));
  EXPECT_EQ(pinv_diag(Eigen::VectorXd::Ones(3)), Eigen::VectorXd::Ones(3));
  EXPECT_EQ(d.cwiseProduct(pinv_diag(d)), Eigen::Vector2d(1.0, 0.0));
  EXPECT_THROW(pinv_diag(Eigen::Vector2d(1.0, -1.0)), Error);
}

TEST(SpectralRadius, Examples) {
  for (int h = 1; h <= 6; ++h) {
    const Eigen::MatrixXd adj = Eigen::MatrixXd::Ones(h + 1, h + 1) - Eigen::MatrixXd::Identity(h + 1, h + 1);
    EXPECT_NEAR(spectral_radius(adj), h, 1e-12);
    const Eigen::VectorXd ev = symmetric_eigenvalues(adj);
    EXPECT_NEAR(ev(0), -1.0, 1e-12);
  }
  EXPECT_EQ(spectral_radius(Eigen::MatrixXd::Zero(3, 3)), 0.0);
  EXPECT_NEAR(spectral_radius(Eigen::Vector2d(-3, 2).asDiagonal().toDenseMatrix()), 3.0, 1e-15);
  Eigen::Matrix2d asym;
  asym << 0, 2, 1, 0;
  EXPECT_GE(spectral_radius(asym), std::sqrt(2.0));
}

TEST(Lemmas, SuitePassesAcrossSeeds) {
  for (std::uint64_t seed : {1ull, 2ull, 20240501ull}) {
    const LemmaSuiteReport r = lemma_property_suite(seed);
    ASSERT_EQ(r.families.size(), 5u);
    for (const auto& f : r.families) {
      EXPECT_EQ(f.trials, 100);
      EXPECT_EQ(f.failures, 0) << f.name << "\n" << f.counterexample;
    }
  }
}

TEST(Lemmas, EqualityCases) {
  // eps = 1, A = B: AB' + BA' = AA' + BB'.
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
  const LoewnerReport r = loewner_leq(2 * a * a.transpose(), 2 * a * a.transpose());
  EXPECT_EQ(r.min_eig_diff, 0.0);
  // One summand: (A) Pi (A) = 1 * A Pi A.
  const Eigen::MatrixXd s = a + a.transpose();
  const Eigen::MatrixXd pi = Eigen::Vector3d(0.2, 0.0, 0.5).asDiagonal();
  EXPECT_LE(max_abs(s * pi * s - 1 * s * pi * s), 0.0);
}

TEST(Lemmas, MonotoneInverse) {
  Eigen::MatrixXd m(2, 2);
  m << 0.1, 0.05, 0.05, -0.3;
  for (double eps : {0.5, 1.0, 2.0}) {
    const Eigen::MatrixXd a = monotone_inverse(m, eps);
    EXPECT_LE(max_abs(monotone_forward(a, eps) - m), 1e-13);
    EXPECT_LE(symmetric_eigenvalues(a).maxCoeff(), 1.0 / (2 * eps) + 1e-15);
  }
  // At eps = 1 the inverse is I/2 - (I/4 - M)^{1/2}.
  const Eigen::MatrixXd direct =
      0.5 * Eigen::MatrixXd::Identity(2, 2) -
      spectral_apply(0.25 * Eigen::MatrixXd::Identity(2, 2) - m, [](double x) { return std::sqrt(x); });
  EXPECT_LE(max_abs(direct - monotone_inverse(m, 1.0)), 1e-14);
}
