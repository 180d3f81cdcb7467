#include <gtest/gtest.h>

#include <map>

#include "linecolor/complex.hpp"
#include "support.hpp"

using namespace linecolor;
using namespace testing_support;

namespace {

ColoringInstance edge_instance(std::vector<std::vector<int>> lists, int q) {
  return make_instance({{1}, {0}}, {{0, 1}}, std::move(lists), q, 0);
}

}  // namespace

TEST(FaceDistribution, TopLevelIsUniform) {
  const auto inst = from_base({{0, 1}, {0, 2}, {0, 3}}, 6);
  const ExtensionCounter counter(inst);
  const FaceDistribution d = face_distribution(pin(inst), 3, counter);
  EXPECT_EQ(d.weights.size(), 120u);
  for (const auto& [face, w] : d.weights) EXPECT_NEAR(w, 1.0 / 120, 1e-15);
  EXPECT_NEAR(d.total(), 1.0, 1e-12);
}

TEST(FaceDistribution, FreeEdgeMarginal) {
  // pi(u c1) = (l_v - [c1 in L_uv]) / (2 (l_u l_v - l_uv)).
  const auto inst = edge_instance({{1, 2, 3, 4}, {3, 4, 5}}, 5);
  const ExtensionCounter counter(inst);
  const FaceDistribution d = face_distribution(pin(inst), 1, counter);
  const double denom = 2.0 * (4 * 3 - 2);
  std::map<Label, double> w;
  for (const auto& [face, x] : d.weights) w[face[0]] = x;
  EXPECT_NEAR(w[(Label{0, 1})], 3 / denom, 1e-15);
  EXPECT_NEAR(w[(Label{0, 3})], 2 / denom, 1e-15);
  EXPECT_NEAR(w[(Label{1, 5})], 4 / denom, 1e-15);
  EXPECT_NEAR(w[(Label{1, 4})], 3 / denom, 1e-15);
  EXPECT_THROW(face_distribution(pin(inst), 3, counter), Error);
}

TEST(FaceDistribution, MarginalizesToLevelOne) {
  const auto inst = from_base({{0, 1}, {1, 2}, {2, 3}}, 5);
  const ExtensionCounter counter(inst);
  const auto d1 = face_distribution(pin(inst), 1, counter);
  const auto d2 = face_distribution(pin(inst), 2, counter);
  std::map<Label, double> one, from_two;
  for (const auto& [f, w] : d1.weights) one[f[0]] += w;
  for (const auto& [f, w] : d2.weights)
    for (const Label& x : f) from_two[x] += w / 2.0;
  for (const auto& [x, w] : one) EXPECT_NEAR(from_two[x], w, 1e-14);
}

TEST(LocalWalk, FreeEdgeEntries) {
  const auto inst = edge_instance({{1, 2}, {1, 2}}, 2);
  const LocalWalk w = local_walk(pin(inst));
  const int u1 = w.position({0, 1});
  const int v2 = w.position({1, 2});
  const int v1 = w.position({1, 1});
  EXPECT_NEAR(w.pi_p(u1, v2), 0.25, 1e-15);
  EXPECT_NEAR(w.pi_p(u1, v1), 0.0, 1e-15);
}

TEST(LocalWalk, DisconnectedIsProduct) {
  const auto inst = make_instance({{}, {}}, {{0}, {1}}, uniform_lists(2, 4), 4);
  const LocalWalk w = local_walk(pin(inst));
  const Eigen::MatrixXd d = w.pi_p - 2.0 * w.pi * w.pi.transpose();
  // Same-vertex blocks of 2 pi pi^T are not in Pi P; only cross terms vanish.
  for (int a = 0; a < w.size(); ++a)
    for (int b = 0; b < w.size(); ++b)
      if (w.index[a].vertex != w.index[b].vertex) EXPECT_NEAR(d(a, b), 0.0, 1e-15);
  EXPECT_LE(walk_lambda2(pin(inst), ExtensionCounter(inst)), 1e-12);
}

TEST(LocalWalk, ReversibleAndStochastic) {
  for (const auto& [name, inst] : small_instances()) {
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      if (p.codim() < 2) return;
      const LocalWalk w = local_walk(p);
      EXPECT_LE(max_abs(w.pi_p - w.pi_p.transpose()), 1e-12);
      const Eigen::MatrixXd t = w.transition();
      for (int a = 0; a < w.size(); ++a) {
        EXPECT_NEAR(t.row(a).sum(), 1.0, 1e-12) << name;
        EXPECT_EQ(t(a, a), 0.0);
      }
    });
  }
  EXPECT_THROW(local_walk(pin(from_base({{0, 1}}, 4, 0))), Error);
}

TEST(Spectrum, ReducedMatchesDense) {
  const auto inst = from_base({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 5);
  const ExtensionCounter counter(inst);
  for_each_pinning(inst, [&](const PartialColoring& tau) {
    const PinnedInstance p(inst, tau);
    if (p.codim() < 2) return;
    const LocalWalk w = local_walk(p);
    Eigen::VectorXd ev = symmetric_eigenvalues(w.symmetrized());
    EXPECT_NEAR(walk_lambda2(p, counter, true), ev(ev.size() - 2), 1e-10);
  });
}

TEST(Garland, IdentitiesOnSmallInstances) {
  for (const auto& [name, inst] : small_instances()) {
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      if (p.codim() < 2) return;
      const GarlandReport r = garland_check(p);
      EXPECT_TRUE(r.pass) << name << ' ' << to_string(tau) << ' ' << r.dev_pi << ' ' << r.dev_pi_p << ' '
                          << r.dev_pi_pi;
    });
  }
}

TEST(LocalToGlobal, Examples) {
  EXPECT_NEAR(local_to_global_gap({0.0, 0.0, 0.0}).bound, 0.75, 1e-15);
  EXPECT_NEAR(local_to_global_gap({0.0}).bound, 0.5, 1e-15);
  EXPECT_TRUE(local_to_global_gap({0.2, 1.0}).degenerate);
  // gamma_i = 1/(9(n-i-1)): prod (1 - 1/(9m)) over m = 1..n-1 decays like n^{-1/9}.
  for (int n : {10, 100, 1000}) {
    std::vector<double> g;
    for (int i = 0; i + 2 <= n; ++i) g.push_back(1.0 / (9.0 * (n - i - 1)));
    const double gap = 1.0 - local_to_global_gap(g).bound;
    const double scaled = gap * std::pow(n, 10.0 / 9.0);
    EXPECT_GT(scaled, 0.5);
    EXPECT_LT(scaled, 1.5);
  }
}

TEST(LocalProfile, BelowOneOnConnectedInstances) {
  const auto inst = from_base({{0, 1}, {0, 2}, {0, 3}}, 6);
  const ExtensionCounter counter(inst);
  for (double g : local_spectral_profile(inst, counter)) EXPECT_LT(g, 1.0);
}
