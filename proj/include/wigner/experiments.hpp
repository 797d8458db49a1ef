#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "wigner/ensembles.hpp"
#include "wigner/error.hpp"
#include "wigner/kernel.hpp"
#include "wigner/rng.hpp"
#include "wigner/semicircle.hpp"
#include "wigner/spectra.hpp"
#include "wigner/stats.hpp"

// Experiments that are not per-index fluctuation runs: equality-in-law
// checks between ensembles, counting statistics, the global density.
namespace wigner::experiments {

struct LawComparison {
  long k = 0;  // 1-based index compared
  stats::KsResult ks;
};

struct LawReport {
  long n = 0;
  long trials = 0;
  std::vector<LawComparison> per_k;

  double min_p() const noexcept {
    double p = 1.0;
    for (const auto& c : per_k) p = std::min(p, c.ks.p_value);
    return p;
  }
  bool pass(double alpha = 0.01) const noexcept { return !per_k.empty() && min_p() > alpha; }
};

namespace detail {
inline void require_ks(std::span<const long> ks, long n) {
  if (ks.empty()) throw InvalidArgument("at least one index k is required");
  for (long k : ks)
    if (k < 1 || k > n) throw InvalidArgument("index k must lie in [1, n]");
}

inline std::vector<double> spectrum_of(const MatrixSample& m) { return eigenvalues(m).values; }

// Per-k two-sample KS between the trial-by-spectrum tables lhs and rhs.
inline LawReport compare(long n, long trials, std::span<const long> ks, const std::vector<std::vector<double>>& lhs,
                         const std::vector<std::vector<double>>& rhs) {
  LawReport r{n, trials, {}};
  for (long k : ks) {
    std::vector<double> a, b;
    a.reserve(lhs.size());
    b.reserve(rhs.size());
    for (const auto& s : lhs) a.push_back(s[static_cast<std::size_t>(k - 1)]);
    for (const auto& s : rhs) b.push_back(s[static_cast<std::size_t>(k - 1)]);
    r.per_k.push_back({k, stats::ks_two_sample(a, b)});
  }
  return r;
}
}  // namespace detail

// k-th point of even(GOE_n u GOE_{n+1}) against the k-th GUE_n eigenvalue,
// from independent samples on each side.
inline LawReport superposition_check(long n, std::vector<long> ks, long trials, std::uint64_t seed, int threads = 1) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  detail::require_ks(ks, n);
  const auto N = static_cast<std::size_t>(n);
  std::vector<std::vector<double>> lhs(static_cast<std::size_t>(trials)), rhs(lhs.size());
  stats::parallel_for(trials, threads, [&](long t) {
    const auto u = static_cast<std::uint64_t>(t);
    const std::uint64_t s1 = rng::derive_seed(seed, u, 1), s2 = rng::derive_seed(seed, u, 2),
                        s3 = rng::derive_seed(seed, u, 3);
    try {
      lhs[t] = superpose_decimate_even(detail::spectrum_of(sample_goe(N, s1)),
                                       detail::spectrum_of(sample_goe(N + 1, s2)));
      rhs[t] = detail::spectrum_of(sample_gue(N, s3));
    } catch (const InvalidArgument&) {
      throw;
    } catch (...) {
      stats::rethrow_with_seed(t, s1);
    }
  });
  return detail::compare(n, trials, ks, lhs, rhs);
}

// even(GOE_{2n+1}) / sqrt(2) against GSE_n, every index.
inline LawReport decimation_check(long n, long trials, std::uint64_t seed, int threads = 1) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const auto N = static_cast<std::size_t>(n);
  std::vector<std::vector<double>> lhs(static_cast<std::size_t>(trials)), rhs(lhs.size());
  stats::parallel_for(trials, threads, [&](long t) {
    const auto u = static_cast<std::uint64_t>(t);
    const std::uint64_t s1 = rng::derive_seed(seed, u, 1), s2 = rng::derive_seed(seed, u, 2);
    try {
      lhs[t] = gse_from_goe(detail::spectrum_of(sample_goe(2 * N + 1, s1)));
      rhs[t] = detail::spectrum_of(sample_gse(N, s2));
    } catch (const InvalidArgument&) {
      throw;
    } catch (...) {
      stats::rethrow_with_seed(t, s1);
    }
  });
  std::vector<long> ks(N);
  for (long k = 1; k <= n; ++k) ks[static_cast<std::size_t>(k - 1)] = k;
  return detail::compare(n, trials, ks, lhs, rhs);
}

struct CountingReport {
  long n = 0;
  long trials = 0;
  Interval interval;
  double mc_mean = 0.0, mc_var = 0.0;
  double mc_mean_stderr = 0.0;
  long endpoint_hits = 0;
  double kernel_mean = 0.0, kernel_var = 0.0;  // GUE_n via the kernel

  double var_ratio() const noexcept { return mc_var / kernel_var; }
};

// Monte-Carlo law of #(I) for an ensemble, next to the GUE kernel values.
// Samples come from the tridiagonal model of the given beta, which has the
// same eigenvalue law as the corresponding invariant ensemble.
inline CountingReport counting_check(long n, Interval iv, int beta, long trials, std::uint64_t seed, int threads = 1,
                                     const kernel::QuadratureOptions& opt = {}) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (trials < 2) throw InvalidArgument("trials must be >= 2");
  if (!is_valid_beta(beta)) throw InvalidArgument("beta must be one of {1,2,4}");
  std::vector<double> counts(static_cast<std::size_t>(trials));
  std::vector<char> hit(counts.size(), 0);
  stats::parallel_for(trials, threads, [&](long t) {
    const std::uint64_t s = rng::derive_seed(seed, static_cast<std::uint64_t>(t));
    const auto c = count_in_interval(reduce(sample_tridiag_beta(static_cast<std::size_t>(n), beta, s)), iv);
    counts[t] = static_cast<double>(c.count);
    hit[t] = c.endpoint_hit;
  });
  CountingReport r;
  r.n = n;
  r.trials = trials;
  r.interval = iv;
  r.mc_mean = stats::mean(counts);
  r.mc_var = stats::variance(counts);
  r.mc_mean_stderr = std::sqrt(r.mc_var / static_cast<double>(trials));
  r.endpoint_hits = std::count(hit.begin(), hit.end(), 1);
  r.kernel_mean = kernel::expected_count(n, iv, opt);
  r.kernel_var = kernel::variance_count(n, iv, opt);
  return r;
}

struct SemicircleReport {
  long n = 0;
  std::uint64_t seed = 0;
  double sup_distance = 0.0;
};

// sup_x |F_n(x) - G(x)| for the spectrum of one GOE_n rescaled by sqrt(2n).
inline SemicircleReport semicircle_check(long n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  auto values = eigenvalues(sample_goe(static_cast<std::size_t>(n), seed)).values;
  const double s = std::sqrt(2.0 * static_cast<double>(n));
  for (double& v : values) v /= s;
  const double d = stats::ks_one_sample(values, [](double t) { return semicircle_cdf(std::clamp(t, -1.0, 1.0)); });
  return {n, seed, d};
}

}  // namespace wigner::experiments
