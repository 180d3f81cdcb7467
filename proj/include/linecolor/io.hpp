#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "linecolor/certificate.hpp"
#include "linecolor/complex.hpp"
#include "linecolor/constraints.hpp"
#include "linecolor/dynamics.hpp"
#include "linecolor/instance.hpp"
#include "linecolor/lemmas.hpp"

namespace linecolor {

using Json = nlohmann::json;

class ParseError : public Error {
 public:
  using Error::Error;
};

struct LoadOptions {
  std::optional<int> q;     // overrides the file
  std::optional<int> beta;  // with uniform lists and no q anywhere: q = beta + Delta + 1
  int min_beta = 2;         // the file may lower this with "min_beta"
};

namespace detail {

inline std::vector<std::vector<int>> int_rows(const Json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array of arrays");
  std::vector<std::vector<int>> out;
  for (const auto& row : j) {
    if (!row.is_array()) throw ParseError(std::string(what) + " must be an array of arrays");
    std::vector<int> r;
    for (const auto& x : row) {
      if (!x.is_number_integer()) throw ParseError(std::string(what) + " entries must be integers");
      r.push_back(x.get<int>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// Instance document:
///   base_graph: [[i, j], ...]            edges of the base graph, or
///   graph: [[nbrs of 0], ...] + cliques   an explicit line graph and clique cover
///   lists: "uniform" | {"uniform": q} | [[colors of 0], ...]
///   q: universe size (optional for explicit lists)
///   min_beta: optional lower bound on the slack, default 2
inline ColoringInstance parse_instance_unchecked(const Json& doc, const LoadOptions& opt) {
  if (!doc.is_object()) throw ParseError("instance must be an object");
  LineGraph g;
  bool explicit_graph = false;
  if (doc.contains("base_graph")) {
    BaseGraph base;
    for (const auto& e : detail::int_rows(doc["base_graph"], "base_graph")) {
      if (e.size() != 2) throw ParseError("base_graph edges must be pairs");
      if (e[0] < 0 || e[1] < 0) throw ParseError("negative base vertex");
      base.edges.emplace_back(e[0], e[1]);
      base.vertex_count = std::max({base.vertex_count, e[0] + 1, e[1] + 1});
    }
    g = line_graph(base);
  } else if (doc.contains("graph")) {
    if (!doc.contains("cliques")) throw ParseError("explicit graph needs cliques");
    g.adjacency = detail::int_rows(doc["graph"], "graph");
    g.cliques = detail::int_rows(doc["cliques"], "cliques");
    explicit_graph = true;
  } else {
    throw ParseError("instance needs base_graph or graph");
  }
  const int n = static_cast<int>(g.adjacency.size());
  int delta = 0;
  for (const auto& nb : g.adjacency) delta = std::max(delta, static_cast<int>(nb.size()));

  std::optional<int> q = opt.q;
  if (!q && doc.contains("q")) {
    if (!doc["q"].is_number_integer()) throw ParseError("q must be an integer");
    q = doc["q"].get<int>();
  }
  std::vector<std::vector<int>> lists;
  const Json lj = doc.value("lists", Json("uniform"));
  if (lj.is_string() || lj.is_object()) {
    if (lj.is_string() && lj.get<std::string>() != "uniform") throw ParseError("unknown list kind");
    if (lj.is_object()) {
      if (!lj.contains("uniform") || !lj["uniform"].is_number_integer()) throw ParseError("lists object needs uniform");
      if (!opt.q) q = lj["uniform"].get<int>();
    }
    if (!q && opt.beta) q = *opt.beta + delta + 1;
    if (!q) throw ParseError("uniform lists need q");
    lists = uniform_lists(n, *q);
  } else {
    lists = detail::int_rows(lj, "lists");
    if (!q) {
      int top = 0;
      for (const auto& l : lists)
        for (int c : l) top = std::max(top, c);
      q = top;
    }
  }
  int min_beta = opt.min_beta;
  if (doc.contains("min_beta")) {
    if (!doc["min_beta"].is_number_integer()) throw ParseError("min_beta must be an integer");
    min_beta = std::min(min_beta, doc["min_beta"].get<int>());
  }
  return explicit_graph ? make_instance(g.adjacency, g.cliques, std::move(lists), *q, min_beta)
                        : make_instance(g, std::move(lists), *q, min_beta);
}

/// Every malformed or invalid document surfaces as ParseError.
inline ColoringInstance parse_instance(const Json& doc, const LoadOptions& opt = {}) {
  try {
    return parse_instance_unchecked(doc, opt);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

inline ColoringInstance load_instance(const std::string& path, const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_instance(doc, opt);
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const LoewnerReport& r) {
  return {{"min_eig_diff", r.min_eig_diff}, {"scale", r.scale}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

inline Json to_json(const Violation& v) {
  return {{"h", v.index}, {"slack", v.slack}, {"constraint", v.constraint}};
}

inline Json to_json(const CertificateSchedule& s) {
  Json v = Json::array();
  for (const auto& x : s.violations) v.push_back(to_json(x));
  return {{"delta", s.delta},         {"beta", s.beta},
          {"iota", s.iota},           {"gamma", s.gamma},
          {"c_delta", s.c_delta},     {"cap", s.cap},
          {"a", s.a},                 {"b_prime", s.b_prime},
          {"b", s.b},                 {"eta_prime", s.eta_prime},
          {"bprime_solvable", s.bprime_solvable}, {"heart", s.heart},
          {"simplified", s.simplified}, {"feasible", s.feasible()},
          {"violations", v}};
}

inline Json to_json(const BetaThreshold& t) {
  return {{"delta", t.delta},
          {"iota", t.iota},
          {"c_delta", t.c_delta},
          {"lines", {t.line[0], t.line[1], t.line[2], t.line[3]}},
          {"heart", t.heart},
          {"simplified", t.simplified},
          {"bprime_exact", t.bprime_exact},
          {"bprime_eps0", t.bprime_eps0},
          {"required", t.required()}};
}

inline Json to_json(const FaceReport& f) {
  Json j{{"tau", to_string(f.tau)},
         {"codim", f.codim},
         {"connected", f.connected},
         {"orbit", f.orbit.str()},
         {"checks_pass", f.checks_pass},
         {"chain_pass", f.chain_pass},
         {"lambda2", f.conclusion.lambda2},
         {"lambda1_certificate", f.conclusion.lambda1},
         {"mains_bound", f.conclusion.mains},
         {"conclusion", f.conclusion.ok},
         {"mains", f.conclusion.mains_ok}};
  if (f.base) j["base"] = {{"lower", to_json(f.base->lower)}, {"upper", to_json(f.base->upper)}};
  if (f.inductive) {
    const auto& r = *f.inductive;
    j["inductive"] = {{"expectation", to_json(r.expectation)},
                      {"cap", to_json(r.cap)},
                      {"product_dev", r.product_dev},
                      {"product_ok", r.product_ok},
                      {"worst_color", r.worst_color}};
  }
  return j;
}

inline Json to_json(const VerifyResult& r, bool all_faces = true) {
  Json faces = Json::array();
  if (all_faces)
    for (const auto& f : r.faces) faces.push_back(to_json(f));
  Json j{{"faces_checked", r.faces_checked},
         {"checks_pass", r.checks_pass},
         {"conclusion_pass", r.conclusion_pass},
         {"mains_pass", r.mains_pass},
         {"faces", faces}};
  j["first_failure"] = r.first_failure >= 0 ? to_json(r.faces[r.first_failure]) : Json(nullptr);
  return j;
}

inline Json to_json(const MixingReport& r) {
  return {{"eps", r.eps},
          {"facets", r.facets},
          {"spectral_gap", r.spectral_gap},
          {"absolute_gap", r.absolute_gap},
          {"lambda_min", r.lambda_min},
          {"t_mix_measured", r.t_mix_measured},
          {"t_mix_bound", r.t_mix_bound},
          {"within_bound", r.within_bound()},
          {"sampled_starts", r.sampled_starts}};
}

inline Json to_json(const GarlandReport& r) {
  return {{"dev_pi", r.dev_pi}, {"dev_pi_p", r.dev_pi_p}, {"dev_pi_pi", r.dev_pi_pi},
          {"pi_p_checked", r.pi_p_checked}, {"pass", r.pass}};
}

inline Json to_json(const LemmaSuiteReport& r) {
  Json fams = Json::array();
  for (const auto& f : r.families)
    fams.push_back({{"name", f.name},
                    {"trials", f.trials},
                    {"checks", f.checks},
                    {"failures", f.failures},
                    {"worst_margin", f.worst_margin},
                    {"counterexample", f.counterexample}});
  return {{"seed", r.seed}, {"pass", r.pass()}, {"families", fams}};
}

}  // namespace linecolor
