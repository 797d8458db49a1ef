#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wigner/error.hpp"
#include "wigner/matrix.hpp"
#include "wigner/quadrature.hpp"
#include "wigner/spectra.hpp"

// GUE determinantal kernel
//
//   K_n(x, y) = sum_{i<n} psi_i(x) psi_i(y),   psi_i(x) = phi_i(x) exp(-x^2/2),
//
// phi_i orthonormal Hermite polynomials for the weight exp(-x^2). The psi_i
// are generated by the three-term recurrence
//
//   psi_{i+1} = x sqrt(2/(i+1)) psi_i - sqrt(i/(i+1)) psi_{i-1}
//
// carried as (mantissa, log-scale) pairs so neither exp(-x^2/2) underflow
// nor polynomial growth ends the recurrence early. K_n itself is evaluated
// through the Christoffel-Darboux form, O(n) per point for the tail
// (psi_{n-2}, psi_{n-1}, psi_n) and O(1) per pair afterwards.
namespace wigner::kernel {

inline constexpr double kPiQuarterInv = 0.75112554446494248286;  // pi^{-1/4}

namespace detail {

// Calls visit(i, mantissa, log_scale) for i = 0..last; psi_i = mantissa * exp(log_scale).
template <class Visit>
void hermite_recurrence(long last, double x, Visit&& visit) {
  double ls = -0.5 * x * x;
  double prev = 0.0, cur = kPiQuarterInv;
  visit(0L, cur, ls);
  for (long i = 0; i < last; ++i) {
    const double di = static_cast<double>(i);
    const double next = x * std::sqrt(2.0 / (di + 1.0)) * cur - std::sqrt(di / (di + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e150) {
      cur *= 1e-150;
      prev *= 1e-150;
      ls += 150.0 * std::numbers::ln10;
    }
    visit(i + 1, cur, ls);
  }
}

inline double assemble(double mantissa, double log_scale) noexcept {
  if (mantissa == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(mantissa)) + log_scale), mantissa);
}

}  // namespace detail

// psi_i(x) = phi_i(x) exp(-x^2/2).
inline double hermite_psi(long i, double x) {
  if (i < 0) throw InvalidArgument("hermite index must be >= 0");
  double out = 0.0;
  detail::hermite_recurrence(i, x, [&](long j, double m, double ls) {
    if (j == i) out = detail::assemble(m, ls);
  });
  return out;
}

// Orthonormal Hermite polynomial phi_i(x); throws when the value leaves the double range.
inline double hermite_phi(long i, double x) {
  if (i < 0) throw InvalidArgument("hermite index must be >= 0");
  double out = 0.0;
  detail::hermite_recurrence(i, x, [&](long j, double m, double ls) {
    if (j != i) return;
    if (m == 0.0) {
      out = 0.0;
      return;
    }
    const double log_abs = std::log(std::abs(m)) + ls + 0.5 * x * x;
    if (log_abs > std::log(std::numeric_limits<double>::max()))
      throw NumericalFailure("hermite_phi(" + std::to_string(i) + ", " + std::to_string(x) +
                             ") overflows the double range");
    out = std::copysign(std::exp(log_abs), m);
  });
  return out;
}

// psi_0(x) .. psi_{count-1}(x).
inline std::vector<double> hermite_psi_all(long count, double x) {
  std::vector<double> out(static_cast<std::size_t>(std::max(0L, count)));
  if (count <= 0) return out;
  detail::hermite_recurrence(count - 1, x, [&](long j, double m, double ls) { out[j] = detail::assemble(m, ls); });
  return out;
}

// (psi_{n-2}, psi_{n-1}, psi_n) at x; psi_{-1} = 0.
struct HermiteTail {
  double nm2 = 0.0, nm1 = 0.0, n = 0.0;
};

inline HermiteTail hermite_tail(long n, double x) {
  if (n < 1) throw InvalidArgument("kernel size n must be >= 1");
  HermiteTail t;
  detail::hermite_recurrence(n, x, [&](long j, double m, double ls) {
    if (j == n - 2) t.nm2 = detail::assemble(m, ls);
    if (j == n - 1) t.nm1 = detail::assemble(m, ls);
    if (j == n) t.n = detail::assemble(m, ls);
  });
  return t;
}

// Direct sum definition; O(n) per pair. Used for small |x - y| and as a test oracle.
inline double kernel_K_direct(long n, double x, double y) {
  if (n < 1) throw InvalidArgument("kernel size n must be >= 1");
  const auto px = hermite_psi_all(n, x);
  const auto py = x == y ? px : hermite_psi_all(n, y);
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += px[i] * py[i];
  return s;
}

// Confluent Christoffel-Darboux: K_n(x, x) = n psi_{n-1}^2 - sqrt(n(n-1)) psi_n psi_{n-2}.
inline double kernel_diagonal(long n, const HermiteTail& t) noexcept {
  const double nd = static_cast<double>(n);
  return nd * t.nm1 * t.nm1 - std::sqrt(nd * (nd - 1.0)) * t.n * t.nm2;
}

// Christoffel-Darboux off the diagonal:
// K_n(x, y) = sqrt(n/2) (psi_n(x) psi_{n-1}(y) - psi_{n-1}(x) psi_n(y)) / (x - y).
inline double kernel_offdiagonal(long n, double x, const HermiteTail& tx, double y, const HermiteTail& ty) noexcept {
  return std::sqrt(0.5 * static_cast<double>(n)) * (tx.n * ty.nm1 - tx.nm1 * ty.n) / (x - y);
}

inline bool near_diagonal(double x, double y) noexcept {
  return std::abs(x - y) <= 1e-9 * (1.0 + std::max(std::abs(x), std::abs(y)));
}

inline double kernel_K(long n, double x, double y) {
  if (n < 1) throw InvalidArgument("kernel size n must be >= 1");
  if (x == y) return kernel_diagonal(n, hermite_tail(n, x));
  if (near_diagonal(x, y)) return kernel_K_direct(n, x, y);
  return kernel_offdiagonal(n, x, hermite_tail(n, x), y, hermite_tail(n, y));
}

struct QuadratureOptions {
  int order = 24;                      // Gauss-Legendre nodes per panel
  double wavelengths_per_panel = 6.0;  // panel width in units of pi / sqrt(2n + 1)
  double abs_tol = 1e-10;              // expected_count target
  double rel_tol = 1e-7;               // variance_count target
  int max_refinements = 4;
};

// Kernel mass is negligible beyond |x| = sqrt(2n) + 10.
inline double truncation_radius(long n) { return std::sqrt(2.0 * static_cast<double>(n)) + 10.0; }

inline double panel_width(long n, const QuadratureOptions& opt) {
  return std::min(2.0, opt.wavelengths_per_panel * std::numbers::pi / std::sqrt(2.0 * static_cast<double>(n) + 1.0));
}

struct Segment {
  double lo, hi;
  double length() const noexcept { return hi - lo; }
};

// Interval clipped to [-L, L]; empty segments dropped.
inline std::vector<Segment> clipped(long n, Interval iv) {
  const double L = truncation_radius(n);
  const double lo = std::max(iv.lo, -L), hi = std::min(iv.hi, L);
  if (hi > lo) return {{lo, hi}};
  return {};
}

// Complement of the interval within [-L, L].
inline std::vector<Segment> clipped_complement(long n, Interval iv) {
  const double L = truncation_radius(n);
  std::vector<Segment> out;
  if (iv.lo > -L) out.push_back({-L, std::min(iv.lo, L)});
  if (iv.hi < L) out.push_back({std::max(iv.hi, -L), L});
  std::erase_if(out, [](const Segment& s) { return !(s.hi > s.lo); });
  return out;
}

inline void require_n(long n) {
  if (n < 1) throw InvalidArgument("kernel size n must be >= 1");
}

// Quadrature nodes over a set of segments with the Hermite tail cached per node.
struct NodeSet {
  std::vector<double> x, w;
  std::vector<HermiteTail> tail;
};

inline NodeSet make_nodes(long n, const std::vector<Segment>& segs, int order, double width) {
  const quad::Rule base = quad::gauss_legendre(order);
  NodeSet s;
  for (const auto& seg : segs) {
    const int panels = std::max(1, static_cast<int>(std::ceil(seg.length() / width)));
    const quad::Rule r = quad::composite(seg.lo, seg.hi, panels, base);
    s.x.insert(s.x.end(), r.nodes.begin(), r.nodes.end());
    s.w.insert(s.w.end(), r.weights.begin(), r.weights.end());
  }
  s.tail.reserve(s.x.size());
  for (double x : s.x) s.tail.push_back(hermite_tail(n, x));
  return s;
}

// E[#(I)] = int_I K_n(x, x) dx by adaptive Gauss-Legendre panels.
inline double expected_count(long n, Interval iv, const QuadratureOptions& opt = {}) {
  require_n(n);
  if (!(iv.lo < iv.hi)) throw InvalidArgument("expected_count: interval must satisfy lo < hi");
  const double h = panel_width(n, opt);
  double total = 0.0;
  for (const auto& seg : clipped(n, iv)) {
    const int panels = std::max(1, static_cast<int>(std::ceil(seg.length() / h)));
    total += quad::adaptive([n](double x) { return kernel_diagonal(n, hermite_tail(n, x)); }, seg.lo, seg.hi, panels,
                            opt.abs_tol, opt.order);
  }
  return total;
}

namespace detail {
// sum_{a in A, b in B} w_a w_b K(x_a, x_b)^2 with Christoffel-Darboux pairs.
inline double cross_kernel_mass(long n, const NodeSet& a, const NodeSet& b) {
  const double c = 0.5 * static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    const double xi = a.x[i];
    const double pn = a.tail[i].n, pnm1 = a.tail[i].nm1;
    double row = 0.0;
    for (std::size_t j = 0; j < b.x.size(); ++j) {
      const double d = xi - b.x[j];
      double k2;
      if (near_diagonal(xi, b.x[j])) {
        const double k = kernel_K_direct(n, xi, b.x[j]);
        k2 = k * k;
      } else {
        const double num = pn * b.tail[j].nm1 - pnm1 * b.tail[j].n;
        k2 = c * num * num / (d * d);
      }
      row += b.w[j] * k2;
    }
    total += a.w[i] * row;
  }
  return total;
}
}  // namespace detail

// Var(#(I)) for the GUE_n point process. K_n is a rank-n projection, so
// int_R K(x, y)^2 dy = K(x, x) and Tr(A - A^2) over I equals the cross term
//   int_I int_{R \ I} K(x, y)^2 dx dy,
// which is what is integrated here (tensor Gauss-Legendre, refined until
// two orders agree to rel_tol).
inline double variance_count(long n, Interval iv, const QuadratureOptions& opt = {}) {
  require_n(n);
  if (!(iv.lo < iv.hi)) throw InvalidArgument("variance_count: interval must satisfy lo < hi");
  const auto inside = clipped(n, iv);
  const auto outside = clipped_complement(n, iv);
  if (inside.empty() || outside.empty()) return 0.0;
  double width = panel_width(n, opt);
  double coarse = 0.0, fine = 0.0;
  for (int r = 0; r <= opt.max_refinements; ++r, width *= 0.5) {
    const int o1 = opt.order, o2 = opt.order + 8;
    coarse = detail::cross_kernel_mass(n, make_nodes(n, inside, o1, width), make_nodes(n, outside, o1, width));
    fine = detail::cross_kernel_mass(n, make_nodes(n, inside, o2, width), make_nodes(n, outside, o2, width));
    if (std::abs(fine - coarse) <= opt.rel_tol * std::abs(fine) + 1e-13) return fine;
  }
  std::ostringstream msg;
  msg << "variance_count did not converge: n=" << n << " interval=(" << iv.lo << ", " << iv.hi
      << ") estimates " << coarse << " vs " << fine;
  throw NumericalFailure(msg.str());
}

// Nystrom discretisation A_ab = sqrt(w_a) K_n(x_a, x_b) sqrt(w_b) of the
// kernel restricted to an interval, with its spectrum.
struct KernelOperator {
  long n = 0;
  Interval interval;
  int order = 0;
  std::vector<double> nodes, weights;
  RealMatrix matrix;
  std::vector<double> eigenvalues;  // ascending

  double trace() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < matrix.size(); ++i) s += matrix(i, i);
    return s;
  }

  // Tr(A^l) from the spectrum.
  double trace_power(int l) const noexcept {
    double s = 0.0;
    for (double a : eigenvalues) s += std::pow(a, l);
    return s;
  }

  // Tr(A^2) directly from the entries.
  double frobenius_squared() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < matrix.size(); ++i)
      for (double v : matrix.row(i)) s += v * v;
    return s;
  }
};

inline constexpr double kSpectrumBand = 1e-8;

inline void check_spectrum_band(const KernelOperator& op) {
  if (op.eigenvalues.empty()) return;
  const double lo = op.eigenvalues.front(), hi = op.eigenvalues.back();
  if (lo < -kSpectrumBand || hi > 1.0 + kSpectrumBand) {
    std::ostringstream msg;
    msg << std::setprecision(12) << "kernel operator spectrum [" << lo << ", " << hi << "] leaves [0, 1]; raise the quadrature order (order="
        << op.order << ", nodes=" << op.nodes.size() << ")";
    throw DiscretizationFailure(msg.str());
  }
}

// Any symmetric matrix as an operator (used for diagonal test operators).
inline KernelOperator operator_from_matrix(RealMatrix m) {
  KernelOperator op;
  op.matrix = std::move(m);
  op.eigenvalues = op.matrix.size() ? eigenvalues_ql(tridiagonalize(op.matrix)) : std::vector<double>{};
  return op;
}

inline KernelOperator discretize_operator(long n, Interval iv, int order, const QuadratureOptions& opt = {}) {
  require_n(n);
  if (order < 16) throw InvalidArgument("discretize_operator: quadrature order must be >= 16");
  if (!(iv.lo < iv.hi)) throw InvalidArgument("discretize_operator: interval must satisfy lo < hi");
  const NodeSet ns = make_nodes(n, clipped(n, iv), order, panel_width(n, opt));
  const std::size_t N = ns.x.size();
  KernelOperator op;
  op.n = n;
  op.interval = iv;
  op.order = order;
  op.nodes = ns.x;
  op.weights = ns.w;
  op.matrix = RealMatrix(N);
  for (std::size_t a = 0; a < N; ++a) {
    const double sa = std::sqrt(ns.w[a]);
    op.matrix(a, a) = ns.w[a] * kernel_diagonal(n, ns.tail[a]);
    for (std::size_t b = 0; b < a; ++b) {
      const double k = near_diagonal(ns.x[a], ns.x[b]) ? kernel_K_direct(n, ns.x[a], ns.x[b])
                                                        : kernel_offdiagonal(n, ns.x[a], ns.tail[a], ns.x[b], ns.tail[b]);
      const double v = sa * k * std::sqrt(ns.w[b]);
      op.matrix(a, b) = v;
      op.matrix(b, a) = v;
    }
  }
  if (N > 0) op.eigenvalues = eigenvalues_ql(tridiagonalize(op.matrix));
  check_spectrum_band(op);
  return op;
}

// ---------------------------------------------------------------------------
// Cumulants of the counting statistic nu = #(I).
//
// For a determinantal process the generating functions satisfy
//   sum_k (iz)^k/k! C_k = sum_k (e^{iz} - 1)^k / k! T_k,
//   T_k = (-1)^{k-1} (k-1)! Tr(A^k),
// (the sign and the power inside the trace were pinned against the exact
// cumulants of a sum of independent Bernoulli(a_i), a_i the eigenvalues of A).
// Expanding (e^u - 1)^k / k! = sum_l S(l, k) u^l / l! gives
//   C_l = sum_{k<=l} S(l, k) (-1)^{k-1} (k-1)! Tr(A^k),
// and rewriting the top term yields the recursion
//   C_l = (-1)^l (l-1)! Tr(A - A^l) + sum_{s=2}^{l-1} alpha_{s,l} C_s.
// The alpha_{s,l} are solved for below rather than tabulated:
//   alpha_{2,3} = 3, alpha_{2,4} = -11, alpha_{3,4} = 6.
// ---------------------------------------------------------------------------

inline constexpr int kMaxCumulantOrder = 4;

// Stirling numbers of the second kind.
constexpr double stirling2(int l, int k) {
  if (l == 0 && k == 0) return 1.0;
  if (l <= 0 || k <= 0 || k > l) return 0.0;
  return k * stirling2(l - 1, k) + stirling2(l - 1, k - 1);
}

constexpr double factorial(int m) { return m <= 1 ? 1.0 : m * factorial(m - 1); }

// Coefficient of Tr(A^k) in C_l.
constexpr double cumulant_trace_coefficient(int l, int k) {
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return stirling2(l, k) * sign * factorial(k - 1);
}

// alpha_{s,l} for s = 2..l-1 (index s; entries 0 and 1 unused).
inline std::array<double, kMaxCumulantOrder + 1> recursion_coefficients(int l) {
  if (l < 2 || l > kMaxCumulantOrder) throw InvalidArgument("recursion_coefficients: 2 <= l <= 4");
  const double lead = ((l % 2 == 0) ? 1.0 : -1.0) * factorial(l - 1);
  // Residual trace coefficients once the leading term is removed.
  std::array<double, kMaxCumulantOrder + 1> res{}, alpha{};
  for (int k = 1; k <= l; ++k) res[k] = cumulant_trace_coefficient(l, k);
  res[1] -= lead;
  res[l] += lead;
  for (int s = l - 1; s >= 2; --s) {
    alpha[s] = res[s] / cumulant_trace_coefficient(s, s);
    for (int k = 1; k <= s; ++k) res[k] -= alpha[s] * cumulant_trace_coefficient(s, k);
  }
  for (int k = 1; k <= l; ++k)
    if (std::abs(res[k]) > 1e-12) throw NumericalFailure("cumulant recursion coefficients inconsistent");
  return alpha;
}

struct CumulantReport {
  int lmax = 2;
  std::array<double, kMaxCumulantOrder + 1> traces{};  // traces[l] = Tr(A^l)
  double c2 = 0.0;
  double c3 = std::numeric_limits<double>::quiet_NaN();
  double c4 = std::numeric_limits<double>::quiet_NaN();

  double cumulant(int l) const {
    switch (l) {
      case 2: return c2;
      case 3: return c3;
      case 4: return c4;
    }
    throw InvalidArgument("cumulant order must be 2, 3 or 4");
  }
};

inline CumulantReport counting_cumulants(std::span<const double> spectrum, int lmax) {
  if (lmax > kMaxCumulantOrder) throw InvalidArgument("counting_cumulants: lmax > 4 is unsupported");
  if (lmax < 2) throw InvalidArgument("counting_cumulants: lmax must be >= 2");
  CumulantReport r;
  r.lmax = lmax;
  for (int l = 1; l <= lmax; ++l) {
    double s = 0.0;
    for (double a : spectrum) s += std::pow(a, l);
    r.traces[l] = s;
  }
  std::array<double, kMaxCumulantOrder + 1> c{};
  for (int l = 2; l <= lmax; ++l) {
    const double lead = ((l % 2 == 0) ? 1.0 : -1.0) * factorial(l - 1);
    double v = lead * (r.traces[1] - r.traces[l]);
    const auto alpha = recursion_coefficients(l);
    for (int s = 2; s < l; ++s) v += alpha[s] * c[s];
    c[l] = v;
  }
  r.c2 = c[2];
  if (lmax >= 3) r.c3 = c[3];
  if (lmax >= 4) r.c4 = c[4];
  return r;
}

inline CumulantReport counting_cumulants(const KernelOperator& op, int lmax) {
  return counting_cumulants(op.eigenvalues, lmax);
}

// 0 <= Tr(A - A^l) <= (l - 1) C_2, checked with an absolute slack.
inline bool trace_bound_holds(const CumulantReport& r, int l, double slack = 1e-9) {
  if (l < 2 || l > r.lmax) throw InvalidArgument("trace_bound_holds: order out of range");
  const double t = r.traces[1] - r.traces[l];
  return t >= -slack && t <= (l - 1) * r.c2 + slack;
}

}  // namespace wigner::kernel
