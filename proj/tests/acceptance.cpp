// Acceptance run: one PASS/FAIL line per criterion. The exit status is 0 when
// every criterion was evaluated, whatever the verdicts, and 1 when one of
// them could not be evaluated at all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wigner/wigner.hpp"

using namespace wigner;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int evaluated = 0, passed = 0, errors = 0;

void criterion(int id, const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Verdict v = body();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++evaluated;
    passed += v.pass;
    std::printf("%s [%2d] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(), secs);
  } catch (const std::exception& e) {
    ++errors;
    std::printf("FAIL [%2d] %s: error: %s\n", id, name.c_str(), e.what());
  }
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const int kThreads = 0;  // all cores

Verdict law_verdict(const experiments::LawReport& r) {
  std::ostringstream os;
  os << "min p " << r.min_p() << " over k =";
  for (const auto& c : r.per_k) os << ' ' << c.k << " (p " << c.ks.p_value << ')';
  return {r.pass(0.01), os.str()};
}

// One-coordinate fluctuation run judged on KS and variance.
Verdict one_dimensional(EnsembleKind kind, int beta, long n, IndexSpec index, const stats::Thresholds& th,
                        std::uint64_t seed) {
  const stats::ExperimentPlan plan{EnsembleSpec::make(kind, static_cast<std::size_t>(n), 0, beta), std::move(index),
                                   2000, seed, kThreads, th};
  const auto s = stats::run_mc(plan).summary;
  const bool ks = s.ks[0] <= th.ks_max, var = s.var[0] >= th.var_lo && s.var[0] <= th.var_hi;
  return {ks && var, fmt("KS %.4f (<= %.2f %s), var %.4f (in [%.2f, %.2f] %s), mean %.4f", s.ks[0], th.ks_max,
                         ks ? "ok" : "no", s.var[0], th.var_lo, th.var_hi, var ? "ok" : "no", s.mean[0])};
}

Verdict joint_corr(long n, std::vector<long> k, double theta, double target, double tol, std::uint64_t seed) {
  const stats::ExperimentPlan plan{EnsembleSpec::make(EnsembleKind::TridiagBeta, static_cast<std::size_t>(n), 0, 1),
                                   IndexSpec::bulk(std::move(k), {theta}), 3000, seed, kThreads,
                                   stats::Thresholds::bulk()};
  const double c = stats::run_mc(plan).summary.corr(0, 1);
  return {std::abs(c - target) <= tol, fmt("corr %.4f, target %.2f +- %.2f", c, target, tol)};
}

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(WIGNER_FLUCT_BIN) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("cannot start " + cmd);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  if (pclose(p) != 0) throw std::runtime_error("non-zero exit from: " + cmd);
  return out;
}

}  // namespace

int main() {
  criterion(1, "superposition even(GOE_8 u GOE_9) vs GUE_8", [] {
    return law_verdict(experiments::superposition_check(8, {2, 4, 6}, 5000, 1001, kThreads));
  });

  criterion(2, "decimation even(GOE_9)/sqrt2 vs GSE_4", [] {
    return law_verdict(experiments::decimation_check(4, 5000, 1002, kThreads));
  });

  criterion(3, "bulk CLT, GOE and GSE, n=500, k=250", [] {
    const auto goe = one_dimensional(EnsembleKind::TridiagBeta, 1, 500, IndexSpec::bulk({250}),
                                     stats::Thresholds::bulk(), 1003);
    const auto gse = one_dimensional(EnsembleKind::TridiagBeta, 4, 500, IndexSpec::bulk({250}),
                                     stats::Thresholds::bulk(), 1004);
    return Verdict{goe.pass && gse.pass, "GOE " + goe.detail + "; GSE " + gse.detail};
  });

  criterion(4, "edge CLT, GOE, n=800, k=floor(n^0.6)", [] {
    const long n = 800, k = static_cast<long>(std::floor(std::pow(800.0, 0.6)));
    return one_dimensional(EnsembleKind::TridiagBeta, 1, n, IndexSpec::from_indices(Regime::Edge, {k}, n),
                           stats::Thresholds::edge(), 1005);
  });

  criterion(5, "joint bulk covariance, GOE n=1000", [] {
    const long n = 1000, g = static_cast<long>(std::floor(std::sqrt(1000.0)));
    const auto near = joint_corr(n, {n / 2 - g / 2, n / 2 - g / 2 + g}, 0.5, 0.5, 0.12, 1006);
    const auto far = joint_corr(n, {300, 700}, 1.0, 0.0, 0.1, 1007);
    return Verdict{near.pass && far.pass,
                   "gap n^0.5: " + near.detail + (near.pass ? " ok" : " no") + "; gap 0.4n: " + far.detail +
                       (far.pass ? " ok" : " no")};
  });

  criterion(6, "bulk CLT, matched three-point real Wigner, n=500, k=250", [] {
    return one_dimensional(EnsembleKind::WignerRealMatched, 1, 500, IndexSpec::bulk({250}),
                           stats::Thresholds::bulk(), 1008);
  });

  criterion(7, "kernel quadrature identities", [] {
    double worst = 0.0;
    for (long n : {1L, 5L, 20L, 100L}) worst = std::max(worst, std::abs(kernel::expected_count(n, Interval::whole()) - n));
    const double v_all = kernel::variance_count(1, Interval::whole());
    const double v_half = kernel::variance_count(1, Interval::above(0.0));
    const bool ok = worst <= 1e-8 && std::abs(v_all) <= 1e-8 && std::abs(v_half - 0.25) <= 1e-6;
    return Verdict{ok, fmt("max |int K - n| %.2e, Var#(R) %.2e, Var#[0,inf) - 1/4 %.2e", worst, v_all, v_half - 0.25)};
  });

  criterion(8, "bulk expectation, n=1000, k=n/2", [] {
    const long n = 1000, k = 500;
    const double ln = std::log(double(n)), t = semicircle_quantile(1.0 - double(k) / n);
    double worst = 0.0;
    std::ostringstream os;
    for (double x : {-1.0, 0.5, 1.0}) {
      const double lo = std::sqrt(2.0 * n) * t + x * std::sqrt(ln / (2.0 * n));
      const double q = kernel::expected_count(n, Interval::above(lo));
      const double f = n - k - x / std::numbers::pi * std::sqrt((1 - t * t) * ln);
      worst = std::max(worst, std::abs(q - f));
      os << "x=" << x << ": " << q - f << "  ";
    }
    os << "max diff " << worst << " (<= 0.05)";
    return Verdict{worst <= 0.05, os.str()};
  });

  criterion(9, "count variance at t=0 vs (1/2pi^2) log n", [] {
    auto ratio = [](long n) {
      return kernel::variance_count(n, Interval::above(0.0)) / (std::log(double(n)) / (2 * std::numbers::pi * std::numbers::pi));
    };
    const double r200 = ratio(200), r2000 = ratio(2000);
    const bool band = r2000 >= 0.8 && r2000 <= 1.2, closer = std::abs(r2000 - 1) < std::abs(r200 - 1);
    return Verdict{band && closer, fmt("ratio n=200 %.4f, n=2000 %.4f (band [0.8, 1.2] %s; closer to 1 %s)", r200,
                                       r2000, band ? "ok" : "no", closer ? "ok" : "no")};
  });

  criterion(10, "GOE/GUE count variance ratio, n=1000, [0, inf)", [] {
    const auto r = experiments::counting_check(1000, Interval::above(0.0), 1, 4000, 1010, kThreads);
    const double q = r.var_ratio();
    return Verdict{q >= 1.6 && q <= 2.4,
                   fmt("MC var %.4f, kernel var %.4f, ratio %.4f (in [1.6, 2.4]); endpoint hits %ld", r.mc_var,
                       r.kernel_var, q, r.endpoint_hits)};
  });

  criterion(11, "cumulant engine", [] {
    // Diagonal operators against exact Bernoulli-sum cumulants.
    rng::Stream s(1011);
    double oracle_err = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> a(1 + rep % 12);
      for (double& v : a) v = s.uniform();
      RealMatrix d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) d(i, i) = a[i];
      const auto r = kernel::counting_cumulants(kernel::operator_from_matrix(d), 4);
      const auto ex = oracle::bernoulli_cumulants(a);
      for (int l = 2; l <= 4; ++l) oracle_err = std::max(oracle_err, std::abs(r.cumulant(l) - ex[l]));
    }
    // Nystrom C_2 against the count variance; normalised higher cumulants on a fixed bulk interval.
    double c2_err = 0.0;
    double k3[2], k4[2];
    const long ns[2] = {200, 2000};
    for (int i = 0; i < 2; ++i) {
      const double s2n = std::sqrt(2.0 * ns[i]);
      const Interval iv{0.1 * s2n, 0.4 * s2n};
      const auto r = kernel::counting_cumulants(kernel::discretize_operator(ns[i], iv, 24), 4);
      c2_err = std::max(c2_err, std::abs(r.c2 / kernel::variance_count(ns[i], iv) - 1));
      k3[i] = std::abs(r.c3) / std::pow(r.c2, 1.5);
      k4[i] = std::abs(r.c4) / (r.c2 * r.c2);
    }
    const bool ok = oracle_err <= 1e-10 && c2_err <= 1e-5 && k3[1] < k3[0] && k4[1] < k4[0];
    return Verdict{ok, fmt("Bernoulli max err %.2e; C2 rel err %.2e; |C3|/C2^1.5 %.4g -> %.4g; |C4|/C2^2 %.4g -> %.4g",
                           oracle_err, c2_err, k3[0], k3[1], k4[0], k4[1])};
  });

  criterion(12, "interlacing, 10^4 GOE_20 / principal submatrix pairs", [] {
    long failures = 0;
    for (std::uint64_t t = 0; t < 10000; ++t) {
      const auto m = sample_goe(20, rng::derive_seed(1012, t));
      failures += !check_interlacing(eigenvalues(m).values,
                                     eigenvalues_ql(tridiagonalize(principal_submatrix(m.real()))));
    }
    return Verdict{failures == 0, fmt("%ld failures", failures)};
  });

  criterion(13, "semicircle law, one GOE_2000", [] {
    const auto r = experiments::semicircle_check(2000, 1013);
    return Verdict{r.sup_distance <= 0.05, fmt("sup distance %.4f (<= 0.05)", r.sup_distance)};
  });

  criterion(14, "byte-identical JSON across thread counts", [] {
    const std::vector<std::string> runs{
        "joint-fluct --n 400 --k 190,210 --trials 400 --seed 14 --per-trial",
        "edge-fluct --n 300 --k 20 --trials 300 --seed 14 --per-trial",
        "fr-check --n 6 --trials 500 --seed 14",
        "fr-check --mode decimation --n 3 --trials 500 --seed 14"};
    int same = 0;
    for (const auto& a : runs) {
      const std::string one = run_cli(a + " --no-timestamp --threads 1");
      const std::string four = run_cli(a + " --no-timestamp --threads 4");
      const std::string again = run_cli(a + " --no-timestamp --threads 3");
      same += one == four && one == again && !one.empty();
    }
    return Verdict{same == static_cast<int>(runs.size()), fmt("%d of %zu runs identical", same, runs.size())};
  });

  std::printf("%d of %d criteria evaluated, %d passed\n", evaluated, evaluated + errors, passed);
  return errors == 0 ? 0 : 1;
}
