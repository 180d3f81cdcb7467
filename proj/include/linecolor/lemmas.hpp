#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linecolor/specmat.hpp"

namespace linecolor {

/// Inverse of f(x) = x(1 - eps x) on x <= 1/(2 eps), applied spectrally.
/// Requires M <= 1/(4 eps) I.
inline Eigen::MatrixXd monotone_inverse(const Eigen::MatrixXd& m, double eps) {
  return spectral_apply(m, [eps](double y) {
    const double r = 1.0 / (4.0 * eps * eps) - y / eps;
    return 1.0 / (2.0 * eps) - std::sqrt(std::max(0.0, r));
  });
}

inline Eigen::MatrixXd monotone_forward(const Eigen::MatrixXd& a, double eps) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  return a * (id - eps * a);
}

struct LemmaFamily {
  std::string name;
  int trials = 0;
  int checks = 0;
  int failures = 0;
  double worst_margin = 0.0;  // smallest min_eig / max(1, scale) seen
  std::string counterexample;
};

struct LemmaSuiteReport {
  std::uint64_t seed = 0;
  std::vector<LemmaFamily> families;
  bool pass() const {
    for (const auto& f : families)
      if (f.failures > 0) return false;
    return true;
  }
};

namespace detail {

class LemmaRng {
 public:
  explicit LemmaRng(std::uint64_t seed) : gen_(seed) {}
  int size() { return std::uniform_int_distribution<int>(2, 8)(gen_); }
  int count(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool coin() { return std::bernoulli_distribution(0.5)(gen_); }
  Eigen::MatrixXd general(int n) {
    Eigen::MatrixXd m(n, n);
    std::normal_distribution<double> g;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = g(gen_);
    return m;
  }
  Eigen::MatrixXd symmetric(int n) {
    const Eigen::MatrixXd m = general(n);
    return 0.5 * (m + m.transpose());
  }
  Eigen::MatrixXd psd(int n) {
    const Eigen::MatrixXd m = general(n);
    return m * m.transpose() / n;
  }
  // Symmetric with spectrum drawn from [lo, hi].
  Eigen::MatrixXd spectrum_in(int n, double lo, double hi) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(general(n));
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = uniform(lo, hi);
    return q * d.asDiagonal() * q.transpose();
  }

 private:
  std::mt19937_64 gen_;
};

inline void record(LemmaFamily& fam, const std::string& what, const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                   const std::vector<std::pair<std::string, Eigen::MatrixXd>>& inputs, double tol) {
  const LoewnerReport r = loewner_leq(lhs, rhs, tol);
  ++fam.checks;
  const double margin = r.min_eig_diff / std::max(1.0, r.scale);
  if (fam.checks == 1 || margin < fam.worst_margin) fam.worst_margin = margin;
  if (r.pass) return;
  ++fam.failures;
  if (!fam.counterexample.empty()) return;
  std::ostringstream os;
  os << what << ": min eigenvalue " << r.min_eig_diff << " (scale " << r.scale << ")\n";
  for (const auto& [label, m] : inputs) os << label << " =\n" << dump(m);
  os << "lhs =\n" << dump(lhs) << "rhs =\n" << dump(rhs);
  fam.counterexample = os.str();
}

}  // namespace detail

/// Randomized property checks of the Loewner-order lemmas the certificate relies
/// on. Every family is a theorem, so any failure points at the matrix plumbing.
inline LemmaSuiteReport lemma_property_suite(std::uint64_t seed, int trials = 100, double tol = 1e-9) {
  detail::LemmaRng rng(seed);
  LemmaSuiteReport report;
  report.seed = seed;
  using detail::record;

  {
    LemmaFamily fam{"cross-term"};
    for (int t = 0; t < trials; ++t, ++fam.trials) {
      const int n = rng.size();
      const Eigen::MatrixXd a = rng.general(n);
      const Eigen::MatrixXd b = rng.general(n);
      const double eps = std::exp(rng.uniform(-3.0, 3.0));
      const Eigen::MatrixXd aa = a * a.transpose();
      const Eigen::MatrixXd bb = b * b.transpose();
      const Eigen::MatrixXd cross = a * b.transpose() + b * a.transpose();
      const auto in = std::vector<std::pair<std::string, Eigen::MatrixXd>>{{"A", a}, {"B", b}};
      record(fam, "AB'+BA' <= eps AA' + BB'/eps", cross, eps * aa + bb / eps, in, tol);
      record(fam, "(A+B)(A+B)' <= (1+eps)AA' + (1+1/eps)BB'", (a + b) * (a + b).transpose(),
             (1 + eps) * aa + (1 + 1 / eps) * bb, in, tol);
      record(fam, "(A-B)(A-B)' >= (1-eps)AA' + (1-1/eps)BB'", (1 - eps) * aa + (1 - 1 / eps) * bb,
             (a - b) * (a - b).transpose(), in, tol);
    }
    report.families.push_back(fam);
  }

  {
    LemmaFamily fam{"overlap-sum"};
    for (int t = 0; t < trials; ++t, ++fam.trials) {
      const int n = rng.size();
      const int parts = rng.count(1, 5);
      std::vector<std::vector<int>> subsets(parts);
      std::vector<int> cover(n, 0);
      for (auto& u : subsets) {
        for (int v = 0; v < n; ++v)
          if (rng.coin()) u.push_back(v);
        if (u.empty()) u.push_back(rng.count(0, n - 1));
        for (int v : u) ++cover[v];
      }
      Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
      Eigen::MatrixXd bound = Eigen::MatrixXd::Zero(n, n);
      std::vector<std::pair<std::string, Eigen::MatrixXd>> in;
      for (int i = 0; i < parts; ++i) {
        const Eigen::MatrixXd g = rng.general(n);
        Eigen::MatrixXd ai = Eigen::MatrixXd::Zero(n, n);
        int m = 0;
        for (int u : subsets[i]) {
          m = std::max(m, cover[u]);
          for (int v : subsets[i]) ai(u, v) = g(u, v);
        }
        total += ai;
        bound += m * ai * ai.transpose();
        in.emplace_back("A_" + std::to_string(i), ai);
      }
      record(fam, "AA' <= sum m_i A_i A_i'", total * total.transpose(), bound, in, tol);
    }
    report.families.push_back(fam);
  }

  {
    LemmaFamily fam{"squared-sum"};
    for (int t = 0; t < trials; ++t, ++fam.trials) {
      const int n = rng.size();
      const int parts = rng.count(1, 5);
      Eigen::VectorXd pi(n);
      for (int i = 0; i < n; ++i) pi(i) = rng.coin() || i == 0 ? rng.uniform(0.0, 1.0) : 0.0;
      const Eigen::MatrixXd p = pi.asDiagonal();
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
      Eigen::MatrixXd bound = Eigen::MatrixXd::Zero(n, n);
      std::vector<std::pair<std::string, Eigen::MatrixXd>> in{{"Pi", p}};
      for (int i = 0; i < parts; ++i) {
        const Eigen::MatrixXd ai = rng.symmetric(n);
        sum += ai;
        bound += ai * p * ai;
        in.emplace_back("A_" + std::to_string(i), ai);
      }
      record(fam, "(sum A_i) Pi (sum A_i) <= n sum A_i Pi A_i", sum * p * sum, parts * bound, in, tol);
    }
    report.families.push_back(fam);
  }

  {
    LemmaFamily fam{"congruence"};
    for (int t = 0; t < trials; ++t, ++fam.trials) {
      const int n = rng.size();
      const Eigen::MatrixXd a = rng.general(n);
      const Eigen::MatrixXd b = rng.symmetric(n);
      const Eigen::MatrixXd b2 = b + rng.psd(n);
      record(fam, "A'BA <= A'B'A", a.transpose() * b * a, a.transpose() * b2 * a, {{"A", a}, {"B", b}, {"B'", b2}},
             tol);
      // Diagonal scaling preserves the order both ways.
      Eigen::VectorXd d(n);
      for (int i = 0; i < n; ++i) d(i) = rng.uniform(0.1, 2.0);
      const Eigen::MatrixXd dm = d.asDiagonal();
      const Eigen::MatrixXd di = d.cwiseInverse().asDiagonal();
      const Eigen::MatrixXd lo = dm * b * dm;
      const Eigen::MatrixXd hi = dm * b2 * dm;
      record(fam, "DBD <= DB'D", lo, hi, {{"D", dm}, {"B", b}, {"B'", b2}}, tol);
      record(fam, "D^-1 (DBD) D^-1 <= D^-1 (DB'D) D^-1", di * lo * di, di * hi * di, {{"D", dm}, {"B", b}, {"B'", b2}},
             tol);
    }
    report.families.push_back(fam);
  }

  {
    LemmaFamily fam{"monotone"};
    for (int t = 0; t < trials; ++t, ++fam.trials) {
      const int n = rng.size();
      const double eps = std::exp(rng.uniform(-2.0, 2.0));
      const double top = 1.0 / (4.0 * eps);
      // X <= Y <= top I, then A = f^-1(X), B = f^-1(Y) satisfy the hypotheses.
      const Eigen::MatrixXd x = rng.spectrum_in(n, -3.0 * top, 0.6 * top);
      const Eigen::MatrixXd d = rng.psd(n);
      const double dmax = symmetric_eigenvalues(d).maxCoeff();
      const Eigen::MatrixXd y = x + d * std::min(1.0, 0.4 * top / std::max(dmax, 1e-300));
      const Eigen::MatrixXd a = monotone_inverse(x, eps);
      const Eigen::MatrixXd b = monotone_inverse(y, eps);
      const Eigen::MatrixXd half = Eigen::MatrixXd::Identity(n, n) / (2.0 * eps);
      const auto in = std::vector<std::pair<std::string, Eigen::MatrixXd>>{
          {"A", a}, {"B", b}, {"eps", Eigen::MatrixXd::Constant(1, 1, eps)}};
      record(fam, "A <= I/(2eps)", a, half, in, tol);
      record(fam, "B <= I/(2eps)", b, half, in, tol);
      record(fam, "f(A) <= f(B)", monotone_forward(a, eps), monotone_forward(b, eps), in, tol);
      record(fam, "A <= B", a, b, in, tol);
      // Round trip f(f^-1(X)) = X as a square-root regression.
      const double dev = max_abs(monotone_forward(a, eps) - x);
      ++fam.checks;
      if (dev > tol * std::max(1.0, max_abs(x))) {
        ++fam.failures;
        if (fam.counterexample.empty()) fam.counterexample = "round trip deviates by " + std::to_string(dev) + "\n" + dump(x);
      }
    }
    report.families.push_back(fam);
  }
  return report;
}

}  // namespace linecolor
