// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "linecolor/certificate.hpp"
#include "linecolor/complex.hpp"
#include "linecolor/constraints.hpp"
#include "linecolor/dynamics.hpp"
#include "linecolor/io.hpp"
#include "linecolor/lemmas.hpp"
#include "support.hpp"

using namespace linecolor;
using namespace testing_support;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::cout << "criterion " << n << ' ' << (pass ? "PASS" : "FAIL") << ": " << detail << std::endl;
  failures += !pass;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Instances with q <= 8 for the enumeration criteria.
std::vector<Named> enumerable() {
  std::vector<Named> out;
  for (auto& x : small_instances())
    if (x.inst.q <= 8) out.push_back(std::move(x));
  return out;
}

void headline() {
  const auto t0 = std::chrono::steady_clock::now();
  const HeadlineSweep s = headline_constant();
  const double dt = seconds_since(t0);
  // Oracle: brute grid over Delta = e^x written out directly.
  double oracle = 0.0;
  for (double x = 1e-4; x <= 60.0; x += 1e-4) {
    const double d = std::exp(x);
    const double r = 416.0 * (std::pow(d, 0.625) * std::pow(x, 2.5) + 2.0 * std::pow(d, 0.125) * std::sqrt(x)) / (d / x);
    oracle = std::max(oracle, r);
  }
  const bool agree = std::abs(s.sup - oracle) <= 1e-6 * oracle + 1e-3;
  report(1, s.sup < 31210.0 && oracle < 31210.0 && agree && dt < 5.0,
         "sup " + fmt(s.sup) + " at Delta " + fmt(s.argmax_delta) + ", grid oracle " + fmt(oracle) + ", " + fmt(dt) + " s");
}

void garland() {
  const auto t0 = std::chrono::steady_clock::now();
  int links = 0, bad = 0, instances = 0;
  double worst = 0.0;
  for (const auto& [name, inst] : enumerable()) {
    ++instances;
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      if (p.codim() < 2) return;
      const GarlandReport r = garland_check(p, 1e-10);
      ++links;
      bad += !r.pass;
      worst = std::max({worst, r.dev_pi, r.dev_pi_p, r.dev_pi_pi});
    });
  }
  const double dt = seconds_since(t0);
  report(2, bad == 0 && instances >= 3 && dt < 60.0,
         std::to_string(links) + " links on " + std::to_string(instances) + " instances, max deviation " + fmt(worst) +
             ", " + fmt(dt) + " s");
}

void base_case() {
  int faces = 0, lower_bad = 0, upper_bad = 0, upper_bad_roomy = 0;
  double worst_lower = 1e300, worst_upper = 1e300;
  for (const auto& [name, inst] : small_instances()) {
    const ExtensionCounter counter(inst);
    const CertificateEngine engine(
        inst, build_schedule(inst.max_degree, inst.beta, 0.0, ScheduleMode::permissive), counter);
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      if (p.codim() != 2) return;
      ++faces;
      const BaseReport r = engine.verify_base(p);
      worst_lower = std::min(worst_lower, r.lower.min_eig_diff);
      worst_upper = std::min(worst_upper, r.upper.min_eig_diff);
      lower_bad += !r.lower.pass;
      upper_bad += !r.upper.pass;
      upper_bad_roomy += !r.upper.pass && inst.beta >= 6;
    });
  }
  report(3, lower_bad == 0 && upper_bad == 0,
         std::to_string(faces) + " codim-2 faces; lower bound fails on " + std::to_string(lower_bad) +
             " (worst " + fmt(worst_lower) + "); M <= Pi/5 fails on " + std::to_string(upper_bad) + " (worst " +
             fmt(worst_upper) + "), of which " + std::to_string(upper_bad_roomy) +
             " have beta >= 6; diag(M) = Pi/(beta-1)^2 exceeds Pi/5 whenever beta < 6");
}

void identities_and_remainder() {
  double dual = 0.0, expect = 0.0, xi = 0.0, rho_ratio = 0.0;
  bool remainder = true;
  int triples = 0;
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
          ++triples;
          const ColorBlock a = a_matrix(p, i, c, sched, counter, sym);
          const ColorBlock r = a_matrix_recursive(p, i, c, sched, counter, nullptr);
          dual = std::max(dual, max_abs(a.m - r.m));
          bool ok = true;
          double ratio = 0.0;
          xi = std::max(xi, xi_sum_check(p, i, c, counter, sym, 1e-10, &ok, &ratio).deviation);
          remainder = remainder && ok;
          rho_ratio = std::max(rho_ratio, ratio);
          if (p.codim() >= 3 && p.clique_h(i) >= 1) {
            const IdentityCheck e = expectation_identity(p, i, c, sched, counter, sym);
            expect = std::max(expect, e.deviation / std::max(1.0, e.scale));
          }
        }
    });
  }
  report(4, dual <= 1e-10 && expect <= 1e-10 && xi <= 1e-10,
         std::to_string(triples) + " (tau, i, c); dual " + fmt(dual) + ", expectation " + fmt(expect) + ", xi-sum " +
             fmt(xi));
  report(5, remainder, "max rho / (5h/(beta-1)) = " + fmt(rho_ratio) + " over every decomposition");
}

void inductive_chain() {
  const int beta = static_cast<int>(std::ceil(beta_threshold(2).required()));
  const int q = beta + 3;
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail = "q " + std::to_string(q) + " (beta " + std::to_string(beta) + ")";
  for (const auto& [name, edges] : {std::pair<std::string, std::vector<std::pair<int, int>>>{
                                        "C4", {{0, 1}, {1, 2}, {2, 3}, {3, 0}}},
                                    {"C5", {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}}}) {
    const auto inst = from_base(edges, q);
    const ExtensionCounter counter(inst);
    const CertificateSchedule sched = build_schedule(2, inst.beta);
    const CertificateEngine engine(inst, sched, counter);
    const VerifyResult r = engine.verify_all();
    double ratio = 0.0;
    for (const auto& f : r.faces)
      if (f.codim >= 2) ratio = std::max(ratio, f.conclusion.lambda2 / f.conclusion.mains);
    pass = pass && sched.heart && r.checks_pass && r.conclusion_pass && r.mains_pass;
    detail += "; " + name + ": " + std::to_string(r.faces_checked) + " face orbits, checks " +
              (r.checks_pass ? "pass" : "fail") + ", max lambda2 * 9(k-1) " + fmt(ratio);
  }
  const double dt = seconds_since(t0);
  report(6, pass && dt < 600.0, detail + ", " + fmt(dt) + " s");
}

void grid() {
  int bad = 0, cells = 0;
  for (const auto& cell : constraint_grid()) {
    ++cells;
    bad += !cell.ok();
  }
  report(7, bad == 0, std::to_string(cells) + " cells, " + std::to_string(bad) + " with violations or min_p above threshold");
}

void dynamics() {
  bool exact = true;
  double stationarity = 0.0, worst_ratio = 0.0;
  int chains = 0;
  for (const auto& [name, inst] : small_instances()) {
    const GlauberChain chain = glauber_matrix(inst);
    ++chains;
    exact = exact && chain.detailed_balance() && chain.rows_sum_to_one();
    stationarity = std::max(stationarity, chain.stationarity_error());
    const MixingReport m = mixing_time_exact(chain, 0.25);
    worst_ratio = std::max(worst_ratio, m.t_mix_measured / m.t_mix_bound);
  }
  LoadOptions loose;
  loose.min_beta = 0;
  const auto free_edge = parse_instance(
      Json::parse(R"({"base_graph": [[0,1],[1,2]], "lists": [[1,2,3],[2,3]], "min_beta": 0})"), loose);
  const ExtensionCounter counter(free_edge);
  SimulationConfig cfg;
  cfg.steps = 100'000;
  cfg.thin = 10;
  cfg.seed = 2024;
  const SimulationResult sim = simulate(free_edge, cfg);
  double worst_sigma = 0.0;
  for (const auto& m : compare_marginals(free_edge, sim, counter))
    worst_sigma = std::max(worst_sigma, std::abs(m.empirical - m.exact) / m.sigma);
  report(8, exact && stationarity <= 1e-12 && worst_ratio <= 1.0 && worst_sigma <= 3.0,
         std::to_string(chains) + " chains; detailed balance " + (exact ? "exact" : "broken") + ", stationarity " +
             fmt(stationarity) + ", max t_mix/bound " + fmt(worst_ratio) + "; free edge after 1e5 steps: max |z| " +
             fmt(worst_sigma));
}

void lemma_suite() {
  const LemmaSuiteReport r = lemma_property_suite(20240501, 100);
  int checks = 0, fails = 0;
  for (const auto& f : r.families) {
    checks += f.checks;
    fails += f.failures;
  }
  report(9, r.pass(), std::to_string(r.families.size()) + " families, " + std::to_string(checks) + " checks, " +
                          std::to_string(fails) + " failures");
}

void marginals() {
  int pairs = 0, bound_bad = 0;
  double recursion = 0.0;
  for (const auto& [name, inst] : small_instances()) {
    const ExtensionCounter counter(inst);
    for_each_pinning(inst, [&](const PartialColoring& tau) {
      const PinnedInstance p(inst, tau);
      for (int u : p.free_vertices())
        for (int c : p.residual_list(u)) {
          ++pairs;
          const double exact = brute_marginal(inst, tau, u, c);
          bound_bad += !check_marginal_bounds(p, u, c, exact).ok;
          recursion = std::max(recursion, std::abs(marginal_recursive(p, u, c) - exact));
        }
    });
  }
  report(10, bound_bad == 0 && recursion <= 1e-10,
         std::to_string(pairs) + " (tau, u, c); bounds violated " + std::to_string(bound_bad) + ", recursion error " +
             fmt(recursion));
}

}  // namespace

int main() {
  headline();
  garland();
  base_case();
  identities_and_remainder();
  inductive_chain();
  grid();
  dynamics();
  lemma_suite();
  marginals();
  return failures == 0 ? 0 : 1;
}
