#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wigner/ensembles.hpp"
#include "wigner/error.hpp"
#include "wigner/matrix.hpp"

namespace wigner {

// Ordered eigenvalues of one sampled matrix.
struct SpectrumSample {
  std::vector<double> values;  // strictly increasing
  EnsembleSpec spec;
  long trial = 0;

  std::size_t size() const noexcept { return values.size(); }
  // 1-based access, matching the x_1 < ... < x_n labelling.
  double at(std::size_t k) const {
    if (k < 1 || k > values.size()) throw InvalidArgument("eigenvalue index out of range");
    return values[k - 1];
  }
};

// Householder reduction of a real symmetric matrix to tridiagonal form.
// Columns whose below-subdiagonal part is already zero are left untouched,
// so a tridiagonal input is returned unchanged.
inline Tridiagonal tridiagonalize(RealMatrix a) {
  const std::size_t n = a.size();
  if (n == 0) throw ShapeError("tridiagonalize: empty matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::isnan(a(i, j))) throw InvalidArgument("tridiagonalize: NaN entry");
  if (!is_exactly_symmetric(a)) throw ShapeError("tridiagonalize: matrix is not exactly symmetric");

  Tridiagonal t;
  t.diag.resize(n);
  t.offdiag.resize(n > 0 ? n - 1 : 0);
  std::vector<double> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t r0 = k + 1, m = n - r0;
    const double x0 = a(r0, k);
    double sigma = 0.0;
    for (std::size_t i = 1; i < m; ++i) sigma += a(r0 + i, k) * a(r0 + i, k);
    if (sigma == 0.0) {
      t.offdiag[k] = x0;
      continue;
    }
    const double alpha = -std::copysign(std::sqrt(x0 * x0 + sigma), x0);
    v[0] = x0 - alpha;
    for (std::size_t i = 1; i < m; ++i) v[i] = a(r0 + i, k);
    const double beta = 2.0 / (v[0] * v[0] + sigma);

    // p = beta * B v over the trailing block B.
    double pv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = a.data() + (r0 + i) * n + r0;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += row[j] * v[j];
      p[i] = beta * s;
      pv += p[i] * v[i];
    }
    // w = p - (beta/2)(p.v) v, stored back in p; B -= v w' + w v'.
    const double coef = 0.5 * beta * pv;
    for (std::size_t i = 0; i < m; ++i) p[i] -= coef * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      double* row = a.data() + (r0 + i) * n + r0;
      const double vi = v[i], wi = p[i];
      for (std::size_t j = 0; j < m; ++j) row[j] -= vi * p[j] + wi * v[j];
    }
    t.offdiag[k] = alpha;
  }
  for (std::size_t i = 0; i < n; ++i) t.diag[i] = a(i, i);
  if (n >= 2) t.offdiag[n - 2] = a(n - 1, n - 2);
  return t;
}

namespace detail {

inline double pivot_floor(const Tridiagonal& t) noexcept {
  double m = 1.0;
  for (double e : t.offdiag) m = std::max(m, e * e);
  return DBL_MIN * m;
}

// Negative pivots of the LDL' factorisation of T - x I. A vanishing pivot
// is replaced by +pivmin (counts eigenvalues < x) or -pivmin (<= x).
inline long sturm_negatives(const Tridiagonal& t, double x, double signed_pivmin) noexcept {
  long count = 0;
  double d = t.diag[0] - x;
  if (std::abs(d) < std::abs(signed_pivmin)) d = signed_pivmin;
  if (d < 0) ++count;
  const std::size_t n = t.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double e = t.offdiag[i - 1];
    d = (t.diag[i] - x) - e * e / d;
    if (std::abs(d) < std::abs(signed_pivmin)) d = signed_pivmin;
    if (d < 0) ++count;
  }
  return count;
}

}  // namespace detail

// Number of eigenvalues strictly below x (Sturm sequence / LDL' inertia).
inline long sturm_count_below(const Tridiagonal& t, double x) {
  if (std::isnan(x)) throw InvalidArgument("sturm_count_below: x is NaN");
  if (x == std::numeric_limits<double>::infinity()) return static_cast<long>(t.size());
  if (x == -std::numeric_limits<double>::infinity()) return 0;
  return detail::sturm_negatives(t, x, detail::pivot_floor(t));
}

// Number of eigenvalues <= x.
inline long sturm_count_at_or_below(const Tridiagonal& t, double x) {
  if (std::isnan(x)) throw InvalidArgument("sturm_count_at_or_below: x is NaN");
  if (x == std::numeric_limits<double>::infinity()) return static_cast<long>(t.size());
  if (x == -std::numeric_limits<double>::infinity()) return 0;
  return detail::sturm_negatives(t, x, -detail::pivot_floor(t));
}

struct Bounds {
  double lo, hi;
};

inline Bounds gershgorin_bounds(const Tridiagonal& t) noexcept {
  const std::size_t n = t.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.offdiag[i - 1]);
    if (i + 1 < n) r += std::abs(t.offdiag[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double pad = 2.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) + DBL_MIN;
  return {lo - pad, hi + pad};
}

// k-th smallest eigenvalue (1-based) by bisection on Sturm counts.
inline double kth_eigenvalue(const Tridiagonal& t, std::size_t k) {
  const std::size_t n = t.size();
  if (k < 1 || k > n) throw InvalidArgument("kth_eigenvalue: index out of range");
  auto [lo, hi] = gershgorin_bounds(t);
  const double pivmin = detail::pivot_floor(t);
  const long target = static_cast<long>(k);
  // Invariant: #{l < lo} < k <= #{l < hi}.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) + pivmin) break;
    if (detail::sturm_negatives(t, mid, pivmin) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Reference path: every eigenvalue by bisection.
inline std::vector<double> eigenvalues_bisection(const Tridiagonal& t) {
  t.validate();
  std::vector<double> out(t.size());
  for (std::size_t k = 1; k <= t.size(); ++k) out[k - 1] = kth_eigenvalue(t, k);
  return out;
}

// Fast path: implicit-shift QL, eigenvalues only, sorted ascending.
inline std::vector<double> eigenvalues_ql(const Tridiagonal& t) {
  t.validate();
  const int n = static_cast<int>(t.size());
  std::vector<double> d = t.diag, e(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) e[i] = t.offdiag[i];
  // Absolute deflation floor; a purely relative test stalls on clusters near zero.
  double anorm = 0.0;
  for (int i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]) + (i ? std::abs(e[i - 1]) : 0.0));
  const double floor_abs = DBL_EPSILON * anorm;
  for (int l = 0; l < n; ++l) {
    int iter = 0, m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= DBL_EPSILON * dd || std::abs(e[m]) <= floor_abs) break;
      }
      if (m != l) {
        if (iter++ == 100)
          throw NumericalFailure("implicit QL did not converge for eigenvalue " + std::to_string(l));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          e[i + 1] = (r = std::hypot(f, g));
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

enum class EigenMethod { QL, Bisection };

// Tridiagonal form of the matrix whose eigenvalues represent the sample.
// Complex storages go through the real 2n x 2n embedding; the returned
// multiplicity counts how often each represented eigenvalue appears.
struct ReducedForm {
  Tridiagonal tridiagonal;
  int multiplicity = 1;
  double scale = 1.0;
};

inline ReducedForm reduce(const MatrixSample& m) {
  switch (m.storage) {
    case Storage::Tridiagonal: return {m.tridiagonal(), m.multiplicity, m.eigenvalue_scale};
    case Storage::RealSymmetric:
    case Storage::RealEmbeddedHermitian: return {tridiagonalize(m.real()), m.multiplicity, m.eigenvalue_scale};
    case Storage::ComplexHermitian:
    case Storage::QuaternionEmbedded:
      if (!is_exactly_hermitian(m.complex())) throw ShapeError("complex sample is not exactly Hermitian");
      return {tridiagonalize(real_embedding(m.complex())), 2 * m.multiplicity, m.eigenvalue_scale};
  }
  throw InvalidArgument("unknown storage");
}

// Collapses groups of `multiplicity` equal eigenvalues (tolerance
// 1e-8 * spectral radius) to one value each.
inline std::vector<double> deduplicate(std::span<const double> sorted, int multiplicity) {
  if (multiplicity <= 1) return {sorted.begin(), sorted.end()};
  const std::size_t m = static_cast<std::size_t>(multiplicity);
  if (sorted.size() % m != 0) throw ShapeError("spectrum length not divisible by multiplicity");
  double radius = 0.0;
  for (double x : sorted) radius = std::max(radius, std::abs(x));
  const double tol = 1e-8 * std::max(radius, DBL_MIN);
  std::vector<double> out(sorted.size() / m);
  for (std::size_t g = 0; g < out.size(); ++g) {
    const double lo = sorted[g * m], hi = sorted[g * m + m - 1];
    if (hi - lo > tol)
      throw NumericalFailure("eigenvalue group " + std::to_string(g) + " not degenerate within tolerance (spread " +
                             std::to_string(hi - lo) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += sorted[g * m + i];
    out[g] = s / static_cast<double>(m);
  }
  return out;
}

inline std::vector<double> eigenvalues_of(const ReducedForm& r, EigenMethod method) {
  std::vector<double> raw =
      method == EigenMethod::QL ? eigenvalues_ql(r.tridiagonal) : eigenvalues_bisection(r.tridiagonal);
  for (auto& x : raw) x *= r.scale;
  return deduplicate(raw, r.multiplicity);
}

// Full ordered spectrum of a sample, deduplicated for embedded storages.
inline SpectrumSample eigenvalues(const MatrixSample& m, EigenMethod method = EigenMethod::QL, long trial = 0) {
  SpectrumSample s{eigenvalues_of(reduce(m), method), m.spec, trial};
  for (std::size_t i = 1; i < s.values.size(); ++i)
    if (!(s.values[i - 1] < s.values[i]))
      throw DegenerateInput("repeated eigenvalue in sample with seed " + std::to_string(m.spec.seed));
  return s;
}

// Eigenvalues x_k for the requested 1-based indices only, by bisection.
inline std::vector<double> selected_eigenvalues(const ReducedForm& r, std::span<const std::size_t> indices) {
  const std::size_t n = r.tridiagonal.size() / static_cast<std::size_t>(r.multiplicity);
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t k : indices) {
    if (k < 1 || k > n) throw InvalidArgument("eigenvalue index " + std::to_string(k) + " out of range");
    // Values of group k occupy positions (k-1)m+1 .. km; take the first.
    const std::size_t pos = (k - 1) * static_cast<std::size_t>(r.multiplicity) + 1;
    out.push_back(r.scale * kth_eigenvalue(r.tridiagonal, pos));
  }
  return out;
}

inline std::vector<double> selected_eigenvalues(const MatrixSample& m, std::span<const std::size_t> indices) {
  return selected_eigenvalues(reduce(m), indices);
}

// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval above(double a) { return {a, std::numeric_limits<double>::infinity()}; }
  static Interval below(double b) { return {-std::numeric_limits<double>::infinity(), b}; }
  static Interval whole() { return {}; }
  bool contains(double x) const noexcept { return lo < x && x < hi; }
};

struct IntervalCount {
  long count = 0;
  // An eigenvalue sits exactly on an endpoint (probability zero for the
  // continuous ensembles); it is excluded from the count.
  bool endpoint_hit = false;
};

// #{eigenvalues in (lo, hi)} of the tridiagonal's spectrum times `scale`.
inline IntervalCount count_in_interval(const Tridiagonal& t, Interval iv, double scale = 1.0) {
  if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.lo < iv.hi))
    throw InvalidArgument("count_in_interval: interval must satisfy lo < hi");
  if (!(scale > 0.0)) throw InvalidArgument("count_in_interval: scale must be positive");
  const double lo = iv.lo / scale, hi = iv.hi / scale;
  const long below_hi = sturm_count_below(t, hi);
  const long upto_lo = sturm_count_at_or_below(t, lo);
  IntervalCount r;
  r.count = below_hi - upto_lo;
  r.endpoint_hit = sturm_count_at_or_below(t, hi) != below_hi || sturm_count_below(t, lo) != upto_lo;
  return r;
}

// Counting statistic #(I) for a sampled matrix.
inline IntervalCount count_in_interval(const ReducedForm& r, Interval iv) {
  IntervalCount c = count_in_interval(r.tridiagonal, iv, r.scale);
  c.count /= r.multiplicity;
  return c;
}

// r_1 <= s_1 <= r_2 <= ... <= s_{n-1} <= r_n.
inline bool check_interlacing(std::span<const double> parent, std::span<const double> child) {
  if (parent.size() != child.size() + 1) throw ShapeError("check_interlacing: need len(parent) = len(child) + 1");
  for (std::size_t i = 0; i < child.size(); ++i)
    if (!(parent[i] <= child[i] && child[i] <= parent[i + 1])) return false;
  return true;
}

inline bool check_interlacing(const SpectrumSample& parent, const SpectrumSample& child) {
  return check_interlacing(parent.values, child.values);
}

// Leading (n-1) x (n-1) principal submatrix.
inline RealMatrix principal_submatrix(const RealMatrix& a) {
  if (a.size() < 2) throw ShapeError("principal_submatrix: need n >= 2");
  const std::size_t m = a.size() - 1;
  RealMatrix b(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) b(i, j) = a(i, j);
  return b;
}

}  // namespace wigner
