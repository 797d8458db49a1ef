#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "wigner/ensembles.hpp"
#include "wigner/error.hpp"
#include "wigner/fluctuations.hpp"
#include "wigner/matrix.hpp"
#include "wigner/rng.hpp"
#include "wigner/spectra.hpp"

namespace wigner::stats {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double standard_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// sup_x |F_N(x) - cdf(x)|, checked on both sides of every jump.
template <class Cdf>
double ks_one_sample(std::span<const double> samples, Cdf&& cdf) {
  if (samples.empty()) throw InvalidArgument("ks_one_sample: empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_normal(std::span<const double> samples) {
  return ks_one_sample(samples, [](double x) { return standard_normal_cdf(x); });
}

// Kolmogorov survival function Q(lambda) = P(sup |B| > lambda).
inline double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form, fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) s += std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * c);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k, sign = -sign) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += sign * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value, using the
// effective size n_e = n m / (n + m) and the usual finite-size shift of lambda.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Unbiased sample variance; NaN below two samples.
inline double variance(std::span<const double> v) {
  if (v.size() < 2) return kNaN;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Column i of the per-trial vectors.
inline std::vector<double> coordinate(std::span<const FluctuationVector> xs, std::size_t i) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& f : xs) {
    if (i >= f.x.size()) throw ShapeError("fluctuation vectors of unequal length");
    out.push_back(f.x[i]);
  }
  return out;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
  if (a.size() < 2) throw InvalidArgument("pearson: need at least two observations");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    sab += (a[t] - ma) * (b[t] - mb);
    saa += (a[t] - ma) * (a[t] - ma);
    sbb += (b[t] - mb) * (b[t] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw DegenerateInput("pearson: zero-variance coordinate");
  return sab / std::sqrt(saa * sbb);
}

// Pearson correlation matrix of per-trial vectors.
inline CovarianceMatrix empirical_corr(std::span<const FluctuationVector> xs) {
  if (xs.size() < 2) throw InvalidArgument("empirical_corr: need at least two trials");
  const std::size_t m = xs.front().x.size();
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < m; ++i) cols.push_back(coordinate(xs, i));
  CovarianceMatrix c{RealMatrix(m)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double r = i == j ? (pearson(cols[i], cols[i]), 1.0) : pearson(cols[i], cols[j]);
      c.values(i, j) = r;
      c.values(j, i) = r;
    }
  }
  return c;
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once and results are expected to be written by index, so
// the outcome does not depend on the thread count. The failure with the
// smallest index is rethrown.
template <class Body>
void parallel_for(long count, int threads, Body&& body) {
  if (count <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<long>(threads, count));
  std::vector<std::exception_ptr> err(static_cast<std::size_t>(threads));
  std::vector<long> err_at(static_cast<std::size_t>(threads), count);
  auto worker = [&](int w) {
    for (long i = w; i < count; i += threads) {
      try {
        body(i);
      } catch (...) {
        err[w] = std::current_exception();
        err_at[w] = i;
        return;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  const auto first = std::min_element(err_at.begin(), err_at.end()) - err_at.begin();
  if (err[first]) std::rethrow_exception(err[first]);
}

// Rethrows the current exception with the trial's seed prepended.
[[noreturn]] inline void rethrow_with_seed(long trial, std::uint64_t seed) {
  const std::string tag = "trial " + std::to_string(trial) + " (seed " + std::to_string(seed) + "): ";
  try {
    throw;
  } catch (const DiscretizationFailure& e) {
    throw DiscretizationFailure(tag + e.what());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(tag + e.what());
  } catch (const DegenerateInput& e) {
    throw DegenerateInput(tag + e.what());
  }
}

// Acceptance thresholds. Convergence in n is logarithmic and no finite-n
// rates are known, so these are engineering constants sized for n of a few
// hundred to a thousand.
struct Thresholds {
  double ks_max = 0.08;
  double var_lo = 0.8, var_hi = 1.25;
  double corr_tol = 0.12;             // |corr - Lambda| for 0 < Lambda < 1
  double corr_tol_independent = 0.1;  // |corr| when Lambda = 0

  static Thresholds bulk() { return {}; }
  static Thresholds edge() {
    return {0.1, 0.75, 1.3, 0.12, 0.1};
  }
  static Thresholds for_regime(Regime r) { return r == Regime::Bulk ? bulk() : edge(); }
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct ExperimentPlan {
  EnsembleSpec ensemble;  // seed field ignored; trials use derive_seed(master_seed, trial)
  IndexSpec index;
  long trials = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;  // hint only; 0 means hardware concurrency
  Thresholds thresholds = Thresholds::bulk();

  void validate() const {
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    ensemble.validate();
    index.validate_for(static_cast<long>(ensemble.n));
  }

  EnsembleSpec trial_spec(long trial) const {
    EnsembleSpec s = ensemble;
    s.seed = rng::derive_seed(master_seed, static_cast<std::uint64_t>(trial));
    return s;
  }
};

struct Criterion {
  std::string name;  // "ks", "var" or "corr"
  std::vector<std::size_t> coords;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pass = false;

  friend bool operator==(const Criterion& a, const Criterion& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.name == b.name && a.coords == b.coords && same(a.value, b.value) && a.lo == b.lo && a.hi == b.hi &&
           a.pass == b.pass;
  }
};

struct Summary {
  std::vector<double> mean, var, ks;
  RealMatrix corr;         // NaN entries when undefined
  RealMatrix lambda_pred;
  std::vector<Criterion> criteria;

  bool all_pass() const noexcept {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
  }
  friend bool operator==(const Summary&, const Summary&) = default;
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<FluctuationVector> per_trial;
  Summary summary;
};

namespace detail {
inline Criterion band(std::string name, std::vector<std::size_t> coords, double v, double lo, double hi) {
  return {std::move(name), std::move(coords), v, lo, hi, v >= lo && v <= hi};
}
}  // namespace detail

// Pure function of the per-trial data; recomputing it reproduces the stored summary.
inline Summary summarize(std::span<const FluctuationVector> xs, const IndexSpec& index, const Thresholds& th) {
  if (xs.empty()) throw InvalidArgument("summarize: no trials");
  const std::size_t m = index.m();
  Summary s;
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < m; ++i) {
    cols.push_back(coordinate(xs, i));
    s.mean.push_back(mean(cols[i]));
    s.var.push_back(variance(cols[i]));
    s.ks.push_back(ks_normal(cols[i]));
  }
  s.corr = RealMatrix(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double r = kNaN;
      if (xs.size() >= 2 && s.var[i] > 0.0 && s.var[j] > 0.0) r = i == j ? 1.0 : pearson(cols[i], cols[j]);
      s.corr(i, j) = r;
    }
  s.lambda_pred = predicted_cov(index).values;

  for (std::size_t i = 0; i < m; ++i) {
    s.criteria.push_back(detail::band("ks", {i}, s.ks[i], 0.0, th.ks_max));
    s.criteria.push_back(detail::band("var", {i}, s.var[i], th.var_lo, th.var_hi));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double lam = s.lambda_pred(i, j);
      const double tol = lam == 0.0 ? th.corr_tol_independent : th.corr_tol;
      s.criteria.push_back(detail::band("corr", {i, j}, s.corr(i, j), lam - tol, lam + tol));
    }
  return s;
}

// Fluctuation vector of one trial: sample, tracked eigenvalues by bisection, normalise.
inline FluctuationVector fluctuation_trial(const ExperimentPlan& plan, long trial) {
  const EnsembleSpec spec = plan.trial_spec(trial);
  const long n = static_cast<long>(spec.n);
  const auto idx = required_indices(plan.index, n);
  const auto cs = center_scales(plan.index, n, spec.beta);
  const auto sel = selected_eigenvalues(sample(spec), idx);
  return normalize(sel, cs, trial);
}

using TrialFn = std::function<FluctuationVector(const ExperimentPlan&, long)>;

// Monte-Carlo driver. Per-trial seeds and index-addressed storage make the
// result independent of the thread count.
inline ExperimentResult run_mc(const ExperimentPlan& plan, const TrialFn& trial_fn = fluctuation_trial) {
  plan.validate();
  ExperimentResult r{plan, std::vector<FluctuationVector>(static_cast<std::size_t>(plan.trials)), {}};
  parallel_for(plan.trials, plan.threads, [&](long t) {
    try {
      r.per_trial[static_cast<std::size_t>(t)] = trial_fn(plan, t);
    } catch (const InvalidArgument&) {
      throw;
    } catch (...) {
      rethrow_with_seed(t, plan.trial_spec(t).seed);
    }
  });
  r.summary = summarize(r.per_trial, plan.index, plan.thresholds);
  return r;
}

}  // namespace wigner::stats
