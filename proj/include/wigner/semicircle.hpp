#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wigner/error.hpp"

namespace wigner {

// Semicircle density with support [-2 sigma, 2 sigma].
inline double semicircle_density(double x, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("semicircle_density: sigma must be positive");
  const double r2 = 4.0 * sigma * sigma - x * x;
  if (r2 <= 0.0) return 0.0;
  return std::sqrt(r2) / (2.0 * std::numbers::pi * sigma * sigma);
}

// G(t) = (2/pi) int_{-1}^t sqrt(1 - x^2) dx, the semicircle CDF on [-1, 1].
inline double semicircle_cdf(double t) {
  if (!(t >= -1.0 && t <= 1.0)) throw DomainError("G(t) requires -1 <= t <= 1");
  if (t == -1.0) return 0.0;
  if (t == 1.0) return 1.0;
  return (t * std::sqrt(1.0 - t * t) + std::asin(t) + 0.5 * std::numbers::pi) / std::numbers::pi;
}

// Inverse of G by safeguarded Newton: the bracket shrinks every step and a
// Newton step leaving it falls back to bisection.
inline double semicircle_quantile(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("G^{-1}(q) requires 0 <= q <= 1");
  if (q == 0.0) return -1.0;
  if (q == 1.0) return 1.0;
  double lo = -1.0, hi = 1.0;
  double t = 2.0 * q - 1.0;
  for (int it = 0; it < 200; ++it) {
    const double f = semicircle_cdf(t) - q;
    if (std::abs(f) <= 1e-15) return t;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    const double slope = (2.0 / std::numbers::pi) * std::sqrt(1.0 - t * t);
    double next = slope > 0.0 ? t - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) return next;
    t = next;
  }
  return t;
}

enum class Regime { Bulk, Edge };

struct CenterScale {
  double center = 0.0;
  double scale = 1.0;
  Regime regime = Regime::Bulk;
  int beta = 1;
  long k = 0;
  long n = 0;
  // Edge regime with k < 10: the normal approximation is not meant for it.
  bool small_k_warning = false;
};

namespace detail {
inline void require_beta(int beta) {
  if (beta != 1 && beta != 2 && beta != 4) throw InvalidArgument("beta must be one of {1,2,4}");
}
}  // namespace detail

// Bulk centring and scaling of eigenvalue x_k: center t sqrt(2n) with
// t = G^{-1}(k/n), scale (log n / (2 beta (1 - t^2) n))^{1/2}.
inline CenterScale bulk_center_scale(long k, long n, int beta) {
  detail::require_beta(beta);
  if (n < 2 || k < 1 || k > n) throw InvalidArgument("bulk_center_scale: need n >= 2 and 1 <= k <= n");
  const double ratio = static_cast<double>(k) / static_cast<double>(n);
  if (ratio < 1e-6 || ratio > 1.0 - 1e-6)
    throw DomainError("bulk_center_scale: k/n = " + std::to_string(ratio) + " too close to the spectral edge");
  const double t = semicircle_quantile(ratio);
  const double one_minus_t2 = 1.0 - t * t;
  if (!(one_minus_t2 > 0.0)) throw DomainError("bulk_center_scale: G^{-1}(k/n) = +-1");
  const double nd = static_cast<double>(n);
  CenterScale cs;
  cs.center = t * std::sqrt(2.0 * nd);
  cs.scale = std::sqrt(std::log(nd) / (2.0 * beta * one_minus_t2 * nd));
  cs.regime = Regime::Bulk;
  cs.beta = beta;
  cs.k = k;
  cs.n = n;
  return cs;
}

// Edge centring and scaling of eigenvalue x_{n-k}:
// center sqrt(2n) (1 - (3 pi k / (4 sqrt2 n))^{2/3}),
// scale ((1/(12 pi))^{2/3} 2 log k / (beta n^{1/3} k^{2/3}))^{1/2}.
inline CenterScale edge_center_scale(long k, long n, int beta) {
  detail::require_beta(beta);
  if (k < 1 || k >= n) throw InvalidArgument("edge_center_scale: need 1 <= k < n");
  if (k < 2) throw InvalidArgument("edge_center_scale: need k >= 2 (scale vanishes at k = 1)");
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  const double pi = std::numbers::pi;
  CenterScale cs;
  cs.center = std::sqrt(2.0 * nd) * (1.0 - std::pow(3.0 * pi * kd / (4.0 * std::numbers::sqrt2 * nd), 2.0 / 3.0));
  cs.scale = std::sqrt(std::pow(1.0 / (12.0 * pi), 2.0 / 3.0) * 2.0 * std::log(kd) /
                       (beta * std::cbrt(nd) * std::pow(kd, 2.0 / 3.0)));
  cs.regime = Regime::Edge;
  cs.beta = beta;
  cs.k = k;
  cs.n = n;
  cs.small_k_warning = k < 10;
  return cs;
}

}  // namespace wigner
