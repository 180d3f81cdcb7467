#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "linecolor/io.hpp"

using namespace linecolor;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, failed = 1, parse_failure = 2, cap_exceeded = 3 };

struct RunConfig {
  std::string instance;
  std::optional<int> q;
  std::optional<int> beta;
  double iota = 0.0;
  double tol_exact = 1e-12;
  double tol_eig = 1e-9;
  double cap_enum = 1e7;
  std::size_t cap_facets = 10'000;
  std::uint64_t seed = 1;
  double eps = 0.25;
  std::string out;
  std::string format = "json";
  std::uint64_t steps = 100'000;
  int chains = 1;
  std::uint64_t thin = 1;
  int trials = 100;
  unsigned threads = 0;
};

void emit(const RunConfig& cfg, const Json& report, const std::string& text) {
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw Error("cannot write " + cfg.out);
    f << (cfg.format == "text" ? text : report.dump(2) + "\n");
  }
  std::cout << (cfg.format == "json" && cfg.out.empty() ? report.dump(2) + "\n" : text);
}

ColoringInstance load(const RunConfig& cfg, int min_beta = 2) {
  LoadOptions lo;
  lo.q = cfg.q;
  lo.beta = cfg.beta;
  lo.min_beta = min_beta;
  return load_instance(cfg.instance, lo);
}

int cmd_verify(const RunConfig& cfg) {
  const ColoringInstance inst = load(cfg);
  const int beta = cfg.beta.value_or(inst.beta);
  if (beta > inst.beta) throw ParseError("--beta exceeds the slack of the instance");
  const CertificateSchedule sched =
      build_schedule(inst.max_degree, beta, cfg.iota, ScheduleMode::permissive);
  CountOptions co;
  co.direct_cap = cfg.cap_enum;
  const ExtensionCounter counter(inst, co);
  CertificateOptions opt;
  opt.tol_eig = cfg.tol_eig;
  opt.tol_exact = cfg.tol_exact;
  opt.threads = cfg.threads;
  const CertificateEngine engine(inst, sched, counter, opt);
  const VerifyResult r = engine.verify_all();
  const bool pass = r.checks_pass && r.conclusion_pass;

  Json report{{"command", "verify"},
              {"instance", cfg.instance},
              {"vertices", inst.size()},
              {"q", inst.q},
              {"instance_beta", inst.beta},
              {"certified_line_graph", inst.certified},
              {"schedule", to_json(sched)},
              {"result", to_json(r)},
              {"pass", pass}};
  if (inst.max_degree >= 2) report["threshold"] = to_json(beta_threshold(inst.max_degree, cfg.iota));
  std::ostringstream text;
  text << "faces checked: " << r.faces_checked << "\n"
       << "checks: " << (r.checks_pass ? "PASS" : "FAIL") << "\n"
       << "spectral conclusion: " << (r.conclusion_pass ? "PASS" : "FAIL") << "\n"
       << "lambda2 <= 1/(9(k-1)): " << (r.mains_pass ? "PASS" : "FAIL") << "\n"
       << "schedule feasible: " << (sched.feasible() ? "yes" : "no") << "\n";
  if (r.first_failure >= 0) text << "first failing face: " << to_string(r.faces[r.first_failure].tau) << "\n";
  emit(cfg, report, text.str());
  return pass ? ok : failed;
}

int cmd_constraints(const RunConfig& cfg) {
  const HeadlineSweep sweep = headline_constant();
  std::cout << "sup ratio = " << sweep.sup << " at Delta = " << sweep.argmax_delta << "\n";
  std::cout << "sup ratio < 31210: " << (sweep.pass ? "PASS" : "FAIL") << "\n";

  std::ostringstream grid;
  grid << "delta,iota,c_delta,line1,line2,line3,line4,heart,simplified,bprime_exact,bprime_eps0,required\n";
  grid.precision(12);
  for (int d = 2; d <= 1024; d = d < 16 ? d + 1 : d * 2) {
    const BetaThreshold t = beta_threshold(d, cfg.iota);
    grid << d << ',' << t.iota << ',' << t.c_delta;
    for (double l : t.line) grid << ',' << l;
    grid << ',' << t.heart << ',' << t.simplified << ',' << t.bprime_exact << ',' << t.bprime_eps0 << ','
         << t.required() << '\n';
  }

  std::ostringstream minp;
  minp << "system,c1,c2,c3,alpha,horizon,closed_form_p,bisection_p,violations_at_closed_form\n";
  minp.precision(12);
  int bad = 0;
  for (const GridCell& g : constraint_grid()) {
    const ConstraintSystem& s = g.system;
    bad += !g.ok();
    if (s.kind == SystemKind::b_prime)
      minp << "bprime," << s.c1 << ',' << s.c2 << ",,,";
    else
      minp << "b," << s.c1 << ',' << s.c2 << ',' << s.c3 << ',' << s.alpha << ',';
    minp << s.horizon << ',' << s.p << ',' << g.min_p << ',' << g.violations << '\n';
  }
  std::cout << "grid cells with violations or min_p above closed form: " << bad << "\n";
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    std::ofstream(fs::path(cfg.out) / "delta_grid.csv") << grid.str();
    std::ofstream(fs::path(cfg.out) / "min_p.csv") << minp.str();
  } else if (cfg.format == "csv") {
    std::cout << grid.str() << "\n" << minp.str();
  }
  return sweep.pass && bad == 0 ? ok : failed;
}

int cmd_sample(const RunConfig& cfg) {
  const ColoringInstance inst = load(cfg, 0);
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ParseError("--eps must lie in (0, 1)");
  SimulationConfig sc;
  sc.steps = cfg.steps;
  sc.seed = cfg.seed;
  sc.chains = cfg.chains;
  sc.thin = cfg.thin;
  sc.threads = cfg.threads;
  const SimulationResult sim = simulate(inst, sc);

  Json report{{"command", "sample"},
              {"instance", cfg.instance},
              {"steps", cfg.steps},
              {"chains", cfg.chains},
              {"thin", cfg.thin},
              {"seed", cfg.seed},
              {"acceptance", sim.acceptance()},
              {"samples", sim.samples()}};
  std::optional<MixingReport> mix;
  try {
    const GlauberChain chain = glauber_matrix(inst, cfg.cap_facets);
    mix = mixing_time_exact(chain, cfg.eps, 10'000, 1'000'000, cfg.threads);
    report["exact"] = to_json(*mix);
    report["detailed_balance"] = chain.detailed_balance();
    report["rows_sum_to_one"] = chain.rows_sum_to_one();
    report["stationarity_error"] = chain.stationarity_error();
  } catch (const CapExceeded& e) {
    report["exact"] = nullptr;
    report["exact_skipped"] = e.what();
  }
  std::ostringstream marg;
  write_marginals_csv(marg, sim);
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    std::ofstream(fs::path(cfg.out) / "marginals.csv") << marg.str();
    std::ofstream(fs::path(cfg.out) / "report.json") << report.dump(2) << "\n";
    if (mix) {
      std::ofstream tv(fs::path(cfg.out) / "tv.csv");
      write_tv_csv(tv, *mix);
    }
  }
  if (cfg.format == "csv") {
    std::cout << marg.str();
    if (mix) write_tv_csv(std::cout, *mix);
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return !mix || mix->within_bound() ? ok : failed;
}

int cmd_garland(const RunConfig& cfg) {
  const ColoringInstance inst = load(cfg, 0);
  GarlandReport worst;
  std::size_t links = 0;
  bool pass = true;
  const auto node_cap = static_cast<std::uint64_t>(cfg.cap_enum);
  for_each_face_orbit(inst, nullptr, -1, [&](const PartialColoring& tau, const BigInt&) {
    const PinnedInstance p(inst, tau);
    if (p.codim() < 2) return;
    const GarlandReport r = garland_check(p, cfg.tol_exact < 1e-10 ? 1e-10 : cfg.tol_exact, node_cap);
    ++links;
    pass = pass && r.pass;
    worst.dev_pi = std::max(worst.dev_pi, r.dev_pi);
    worst.dev_pi_p = std::max(worst.dev_pi_p, r.dev_pi_p);
    worst.dev_pi_pi = std::max(worst.dev_pi_pi, r.dev_pi_pi);
    worst.pi_p_checked = worst.pi_p_checked || r.pi_p_checked;
  });
  worst.pass = pass;
  Json report{{"command", "garland"}, {"instance", cfg.instance}, {"links", links}, {"worst", to_json(worst)}};
  std::ostringstream text;
  text << "links: " << links << "\nmax deviations: " << worst.dev_pi << ' ' << worst.dev_pi_p << ' '
       << worst.dev_pi_pi << "\ngarland: " << (pass ? "PASS" : "FAIL") << "\n";
  emit(cfg, report, text.str());
  return pass ? ok : failed;
}

int cmd_lemmas(const RunConfig& cfg) {
  const LemmaSuiteReport r = lemma_property_suite(cfg.seed, cfg.trials, cfg.tol_eig);
  std::ostringstream text;
  for (const auto& f : r.families)
    text << f.name << ": " << f.trials << " trials, " << f.checks << " checks, " << f.failures << " failures\n";
  text << "lemmas: " << (r.pass() ? "PASS" : "FAIL") << "\n";
  emit(cfg, to_json(r), text.str());
  return r.pass() ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glauber dynamics on list colorings of line graphs: certificate checks and sampling"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub, bool instance) {
    if (instance) sub->add_option("instance", cfg.instance, "instance file (JSON)")->required();
    sub->add_option("--out", cfg.out, "output file or directory");
    sub->add_option("--format", cfg.format, "json, text or csv")->check(CLI::IsMember({"json", "text", "csv"}));
    sub->add_option("--threads", cfg.threads, "worker threads, 0 = all cores");
  };
  auto* verify = app.add_subcommand("verify", "check the certificate on every face");
  common(verify, true);
  verify->add_option("--q", cfg.q, "color universe size for uniform lists")->check(CLI::PositiveNumber);
  verify->add_option("--beta", cfg.beta, "slack used by the schedule")->check(CLI::Range(2, 1 << 30));
  verify->add_option("--iota", cfg.iota, "override iota")->check(CLI::NonNegativeNumber);
  verify->add_option("--tol-exact", cfg.tol_exact)->check(CLI::PositiveNumber);
  verify->add_option("--tol-eig", cfg.tol_eig)->check(CLI::PositiveNumber);
  verify->add_option("--cap-enum", cfg.cap_enum, "direct enumeration cap")->check(CLI::PositiveNumber);

  auto* constraints = app.add_subcommand("constraints", "threshold tables and the headline constant");
  common(constraints, false);
  constraints->add_option("--iota", cfg.iota, "override iota")->check(CLI::NonNegativeNumber);

  auto* sample = app.add_subcommand("sample", "simulate the dynamics; exact mixing on small instances");
  common(sample, true);
  sample->add_option("--q", cfg.q)->check(CLI::PositiveNumber);
  sample->add_option("--beta", cfg.beta)->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", cfg.seed);
  sample->add_option("--eps", cfg.eps, "TV target for t_mix");
  sample->add_option("--steps", cfg.steps)->check(CLI::PositiveNumber);
  sample->add_option("--chains", cfg.chains)->check(CLI::PositiveNumber);
  sample->add_option("--thin", cfg.thin)->check(CLI::PositiveNumber);
  sample->add_option("--cap-facets", cfg.cap_facets, "largest chain built exactly")->check(CLI::PositiveNumber);

  auto* garland = app.add_subcommand("garland", "Garland identities on every link");
  common(garland, true);
  garland->add_option("--q", cfg.q)->check(CLI::PositiveNumber);
  garland->add_option("--tol-exact", cfg.tol_exact)->check(CLI::PositiveNumber);
  garland->add_option("--cap-enum", cfg.cap_enum)->check(CLI::PositiveNumber);

  auto* lemmas = app.add_subcommand("lemmas", "randomized Loewner-order lemma suite");
  common(lemmas, false);
  lemmas->add_option("--seed", cfg.seed);
  lemmas->add_option("--trials", cfg.trials)->check(CLI::PositiveNumber);
  lemmas->add_option("--tol-eig", cfg.tol_eig)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return parse_failure;
  }

  try {
    if (*verify) return cmd_verify(cfg);
    if (*constraints) return cmd_constraints(cfg);
    if (*sample) return cmd_sample(cfg);
    if (*garland) return cmd_garland(cfg);
    if (*lemmas) return cmd_lemmas(cfg);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return parse_failure;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return cap_exceeded;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failed;
  }
  return failed;
}
