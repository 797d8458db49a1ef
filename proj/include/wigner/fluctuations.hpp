#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wigner/error.hpp"
#include "wigner/matrix.hpp"
#include "wigner/semicircle.hpp"
#include "wigner/spectra.hpp"

namespace wigner {

// Which eigenvalues to follow and the growth exponents that drive the
// predicted covariance.
//
// Indices are ascending in both regimes, with gaps k_{i+1} - k_i ~ n^theta_i.
// In the bulk k_i is the eigenvalue index itself; at the edge k_i counts
// down from the top, the tracked eigenvalue being x_{n - k_i}, and
// k_1 ~ n^gamma.
struct IndexSpec {
  Regime regime = Regime::Bulk;
  std::vector<long> k;
  std::vector<double> theta;  // length m - 1
  double gamma = 0.0;         // edge only

  std::size_t m() const noexcept { return k.size(); }

  void validate() const {
    if (k.empty()) throw InvalidArgument("index spec needs at least one index");
    if (theta.size() + 1 != k.size()) throw ShapeError("index spec needs m - 1 exponents theta");
    for (std::size_t i = 1; i < k.size(); ++i)
      if (!(k[i - 1] < k[i])) throw InvalidArgument("indices must be strictly increasing");
    if (k.front() < 1) throw InvalidArgument("indices must be >= 1");
    if (regime == Regime::Bulk) {
      for (double t : theta)
        if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("bulk exponents theta must lie in (0, 1]");
    } else {
      if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("edge exponent gamma must lie in (0, 1)");
      for (double t : theta)
        if (!(t > 0.0 && t < gamma)) throw InvalidArgument("edge exponents must satisfy 0 < theta < gamma");
    }
  }

  void validate_for(long n) const {
    validate();
    if (regime == Regime::Bulk && k.back() > n) throw InvalidArgument("bulk index exceeds n");
    if (regime == Regime::Edge && k.back() >= n) throw InvalidArgument("edge index must satisfy k < n");
  }

  static IndexSpec bulk(std::vector<long> k, std::vector<double> theta = {}) {
    IndexSpec s{Regime::Bulk, std::move(k), std::move(theta), 0.0};
    s.validate();
    return s;
  }

  static IndexSpec edge(std::vector<long> k, std::vector<double> theta, double gamma) {
    IndexSpec s{Regime::Edge, std::move(k), std::move(theta), gamma};
    s.validate();
    return s;
  }

  // Exponents read off raw indices at finite n: theta_i = log(gap_i)/log n,
  // and at the edge gamma = log(k_1)/log n.
  static IndexSpec from_indices(Regime regime, std::vector<long> k, long n) {
    if (n < 2) throw InvalidArgument("from_indices: need n >= 2");
    const double ln = std::log(static_cast<double>(n));
    IndexSpec s{regime, std::move(k), {}, 0.0};
    for (std::size_t i = 1; i < s.k.size(); ++i)
      s.theta.push_back(std::log(static_cast<double>(s.k[i] - s.k[i - 1])) / ln);
    if (regime == Regime::Edge && !s.k.empty()) s.gamma = std::log(static_cast<double>(s.k.front())) / ln;
    s.validate_for(n);
    return s;
  }
};

struct FluctuationVector {
  std::vector<double> x;
  long trial = 0;
};

// Symmetric m x m matrix with unit diagonal and entries in [0, 1].
struct CovarianceMatrix {
  RealMatrix values;

  std::size_t size() const noexcept { return values.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values(i, j); }
};

// 1-based eigenvalue indices tracked by the spec (x_{k_i} or x_{n - k_i}).
inline std::vector<std::size_t> required_indices(const IndexSpec& spec, long n) {
  spec.validate_for(n);
  std::vector<std::size_t> out;
  for (long k : spec.k) out.push_back(static_cast<std::size_t>(spec.regime == Regime::Bulk ? k : n - k));
  return out;
}

inline std::vector<CenterScale> center_scales(const IndexSpec& spec, long n, int beta) {
  spec.validate_for(n);
  std::vector<CenterScale> out;
  for (long k : spec.k)
    out.push_back(spec.regime == Regime::Bulk ? bulk_center_scale(k, n, beta) : edge_center_scale(k, n, beta));
  return out;
}

// X_i = (value_i - center_i) / scale_i, value_i being the eigenvalue at required_indices()[i].
inline FluctuationVector normalize(std::span<const double> selected, std::span<const CenterScale> cs,
                                   long trial = 0) {
  if (selected.size() != cs.size()) throw ShapeError("normalize: one eigenvalue per center/scale");
  FluctuationVector f{std::vector<double>(selected.size()), trial};
  for (std::size_t i = 0; i < selected.size(); ++i) f.x[i] = (selected[i] - cs[i].center) / cs[i].scale;
  return f;
}

namespace detail {
inline FluctuationVector normalize_full(const SpectrumSample& s, const IndexSpec& spec, int beta, Regime expected) {
  if (spec.regime != expected) throw InvalidArgument("index spec regime does not match normalisation");
  const long n = static_cast<long>(s.size());
  const auto idx = required_indices(spec, n);
  std::vector<double> sel;
  for (std::size_t k : idx) sel.push_back(s.at(k));
  const auto cs = center_scales(spec, n, beta);
  return normalize(sel, cs, s.trial);
}
}  // namespace detail

inline FluctuationVector normalize_bulk(const SpectrumSample& s, const IndexSpec& spec, int beta) {
  return detail::normalize_full(s, spec, beta, Regime::Bulk);
}

inline FluctuationVector normalize_edge(const SpectrumSample& s, const IndexSpec& spec, int beta) {
  return detail::normalize_full(s, spec, beta, Regime::Edge);
}

namespace detail {
// Lambda_ij = 1 - max{theta_l : i <= l < j} / divisor for i < j.
inline CovarianceMatrix max_theta_cov(const IndexSpec& spec, double divisor) {
  const std::size_t m = spec.m();
  CovarianceMatrix c{RealMatrix(m)};
  for (std::size_t i = 0; i < m; ++i) {
    c.values(i, i) = 1.0;
    double mx = 0.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      mx = std::max(mx, spec.theta[j - 1]);
      const double v = std::clamp(1.0 - mx / divisor, 0.0, 1.0);
      c.values(i, j) = v;
      c.values(j, i) = v;
    }
  }
  return c;
}
}  // namespace detail

inline CovarianceMatrix predicted_cov_bulk(const IndexSpec& spec) {
  if (spec.regime != Regime::Bulk) throw InvalidArgument("predicted_cov_bulk needs a bulk index spec");
  spec.validate();
  return detail::max_theta_cov(spec, 1.0);
}

inline CovarianceMatrix predicted_cov_edge(const IndexSpec& spec) {
  if (spec.regime != Regime::Edge) throw InvalidArgument("predicted_cov_edge needs an edge index spec");
  spec.validate();
  return detail::max_theta_cov(spec, spec.gamma);
}

inline CovarianceMatrix predicted_cov(const IndexSpec& spec) {
  return spec.regime == Regime::Bulk ? predicted_cov_bulk(spec) : predicted_cov_edge(spec);
}

}  // namespace wigner
