#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wigner/error.hpp"
#include "wigner/matrix.hpp"
#include "wigner/rng.hpp"

namespace wigner {

enum class EnsembleKind { GOE, GUE, GSE, WignerRealMatched, WignerHermitianMatched, TridiagBeta };

inline std::string_view to_string(EnsembleKind k) noexcept {
  switch (k) {
    case EnsembleKind::GOE: return "goe";
    case EnsembleKind::GUE: return "gue";
    case EnsembleKind::GSE: return "gse";
    case EnsembleKind::WignerRealMatched: return "wigner-real";
    case EnsembleKind::WignerHermitianMatched: return "wigner-hermitian";
    case EnsembleKind::TridiagBeta: return "tridiag";
  }
  return "?";
}

inline EnsembleKind ensemble_kind_from_string(std::string_view s) {
  for (auto k : {EnsembleKind::GOE, EnsembleKind::GUE, EnsembleKind::GSE, EnsembleKind::WignerRealMatched,
                 EnsembleKind::WignerHermitianMatched, EnsembleKind::TridiagBeta})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown ensemble '" + std::string(s) + "'");
}

inline bool is_valid_beta(int beta) noexcept { return beta == 1 || beta == 2 || beta == 4; }

// Dyson index implied by an ensemble kind; TridiagBeta carries its own.
inline int implied_beta(EnsembleKind k, int declared) noexcept {
  switch (k) {
    case EnsembleKind::GOE:
    case EnsembleKind::WignerRealMatched: return 1;
    case EnsembleKind::GUE:
    case EnsembleKind::WignerHermitianMatched: return 2;
    case EnsembleKind::GSE: return 4;
    case EnsembleKind::TridiagBeta: return declared;
  }
  return declared;
}

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::GOE;
  std::size_t n = 1;
  int beta = 1;
  std::uint64_t seed = 0;

  static EnsembleSpec make(EnsembleKind kind, std::size_t n, std::uint64_t seed, int beta = 0) {
    EnsembleSpec s{kind, n, implied_beta(kind, beta), seed};
    s.validate();
    return s;
  }

  void validate() const {
    if (n < 1) throw InvalidArgument("matrix size n must be >= 1");
    if (!is_valid_beta(beta)) throw InvalidArgument("beta must be one of {1,2,4}");
    if (kind != EnsembleKind::TridiagBeta && beta != implied_beta(kind, beta))
      throw InvalidArgument("beta " + std::to_string(beta) + " inconsistent with ensemble " +
                            std::string(to_string(kind)));
  }

  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

// Off-diagonal entry law. Gaussian, or the symmetric three-point law
// P(+c) = P(-c) = p, P(0) = 1 - 2p.
struct EntryDistribution {
  enum class Kind { Gaussian, ThreePoint };
  struct Moments {
    double mean, variance, third, fourth;
  };

  Kind kind = Kind::Gaussian;
  double variance = 1.0;  // Gaussian only
  double c = 0.0;         // three-point only
  double p = 0.0;

  static EntryDistribution gaussian(double var) { return {Kind::Gaussian, var, 0.0, 0.0}; }
  static EntryDistribution three_point(double c, double p) {
    if (!(p > 0.0 && p <= 0.5) || !(c > 0.0)) throw InvalidArgument("three-point law needs c > 0, 0 < p <= 1/2");
    return {Kind::ThreePoint, 2.0 * p * c * c, c, p};
  }
  // Three-point law with P(+-c) = 1/6 matching the first four Gaussian moments
  // of N(0, var): variance c^2/3, fourth moment c^4/3 = 3 var^2.
  static EntryDistribution matched(double var) { return three_point(std::sqrt(3.0 * var), 1.0 / 6.0); }

  Moments moments() const noexcept {
    if (kind == Kind::Gaussian) return {0.0, variance, 0.0, 3.0 * variance * variance};
    const double c2 = c * c;
    return {0.0, 2.0 * p * c2, 0.0, 2.0 * p * c2 * c2};
  }

  double draw(rng::Stream& s) const noexcept {
    if (kind == Kind::Gaussian) return s.normal(variance);
    const double u = s.uniform();
    if (u < p) return -c;
    if (u < 2.0 * p) return c;
    return 0.0;
  }
};

enum class Storage {
  RealSymmetric,         // n x n real
  ComplexHermitian,      // n x n complex
  RealEmbeddedHermitian, // 2n x 2n real embedding of a complex Hermitian matrix
  QuaternionEmbedded,    // 2n x 2n complex embedding of a quaternion self-dual matrix
  Tridiagonal            // symmetric tridiagonal, n
};

struct MatrixSample {
  Storage storage = Storage::RealSymmetric;
  std::variant<RealMatrix, ComplexMatrix, Tridiagonal> data;
  EnsembleSpec spec;
  // Number of times each eigenvalue of the represented n x n matrix appears
  // in the stored matrix (2 for both embedded forms).
  int multiplicity = 1;
  // Factor applied to the stored matrix's eigenvalues to land on the
  // ensemble's eigenvalue law (1/sqrt(beta) for the tridiagonal model).
  double eigenvalue_scale = 1.0;

  const RealMatrix& real() const { return std::get<RealMatrix>(data); }
  const ComplexMatrix& complex() const { return std::get<ComplexMatrix>(data); }
  const Tridiagonal& tridiagonal() const { return std::get<Tridiagonal>(data); }
};

namespace detail {

inline void require_size(std::size_t n) {
  if (n < 1) throw InvalidArgument("matrix size n must be >= 1");
}

// Real symmetric Wigner matrix; entries consumed in row-major upper-triangle order.
inline RealMatrix real_wigner(std::size_t n, rng::Stream& s, double diag_var, const EntryDistribution& off) {
  RealMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = (i == j) ? s.normal(diag_var) : off.draw(s);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

// Complex Hermitian Wigner matrix; (Re, Im) per upper-triangle entry, row-major.
inline ComplexMatrix hermitian_wigner(std::size_t n, rng::Stream& s, double diag_var, const EntryDistribution& off) {
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i == j) {
        m(i, i) = Complex(s.normal(diag_var), 0.0);
      } else {
        const double re = off.draw(s);
        const double im = off.draw(s);
        m(i, j) = Complex(re, im);
        m(j, i) = Complex(re, -im);
      }
    }
  return m;
}

}  // namespace detail

// GOE: independent N(0, (1 + delta_ij)/2) entries.
inline MatrixSample sample_goe(std::size_t n, std::uint64_t seed) {
  detail::require_size(n);
  rng::Stream s(seed);
  return {Storage::RealSymmetric, detail::real_wigner(n, s, 1.0, EntryDistribution::gaussian(0.5)),
          EnsembleSpec{EnsembleKind::GOE, n, 1, seed}, 1, 1.0};
}

// GUE: Re, Im of off-diagonal entries N(0, 1/4); real diagonal N(0, 1/2).
inline MatrixSample sample_gue(std::size_t n, std::uint64_t seed) {
  detail::require_size(n);
  rng::Stream s(seed);
  return {Storage::ComplexHermitian, detail::hermitian_wigner(n, s, 0.5, EntryDistribution::gaussian(0.25)),
          EnsembleSpec{EnsembleKind::GUE, n, 2, seed}, 1, 1.0};
}

// Writes the 2x2 complex block of the quaternion a + b e1 + c e2 + d e3 at
// block position (j, k); e1 -> diag(i, -i), e2 -> [[0, 1], [-1, 0]], e3 -> [[0, i], [i, 0]].
inline void put_quaternion_block(ComplexMatrix& m, std::size_t j, std::size_t k, double a, double b, double c,
                                 double d) {
  m(2 * j, 2 * k) = Complex(a, b);
  m(2 * j, 2 * k + 1) = Complex(c, d);
  m(2 * j + 1, 2 * k) = Complex(-c, d);
  m(2 * j + 1, 2 * k + 1) = Complex(a, -b);
}

// GSE: quaternion self-dual Hermitian matrix with h^(0)_jj ~ N(0, 1/4) and
// every component of the off-diagonal quaternions ~ N(0, 1/8), returned in
// its 2n x 2n complex embedding (each eigenvalue doubled).
inline MatrixSample sample_gse(std::size_t n, std::uint64_t seed) {
  detail::require_size(n);
  rng::Stream s(seed);
  ComplexMatrix m(2 * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      if (j == k) {
        put_quaternion_block(m, j, j, s.normal(0.25), 0.0, 0.0, 0.0);
      } else {
        const double a = s.normal(0.125), b = s.normal(0.125), c = s.normal(0.125), d = s.normal(0.125);
        put_quaternion_block(m, j, k, a, b, c, d);
        put_quaternion_block(m, k, j, a, -b, -c, -d);  // quaternion conjugate
      }
    }
  return {Storage::QuaternionEmbedded, std::move(m), EnsembleSpec{EnsembleKind::GSE, n, 4, seed}, 2, 1.0};
}

enum class Symmetry { Real, Hermitian };

// Wigner matrix whose off-diagonal entries (components, in the Hermitian
// case) follow the matched three-point law; Gaussian diagonal.
inline MatrixSample sample_matched_wigner(std::size_t n, std::uint64_t seed, Symmetry symmetry) {
  detail::require_size(n);
  rng::Stream s(seed);
  if (symmetry == Symmetry::Real)
    return {Storage::RealSymmetric, detail::real_wigner(n, s, 1.0, EntryDistribution::matched(0.5)),
            EnsembleSpec{EnsembleKind::WignerRealMatched, n, 1, seed}, 1, 1.0};
  return {Storage::ComplexHermitian, detail::hermitian_wigner(n, s, 0.5, EntryDistribution::matched(0.25)),
          EnsembleSpec{EnsembleKind::WignerHermitianMatched, n, 2, seed}, 1, 1.0};
}

// Tridiagonal beta-Hermite model: diagonal N(0, 1) (n draws first), then
// off-diagonal k = 1..n-1 distributed as chi_{beta (n - k)} / sqrt(2).
// Its eigenvalues have joint density proportional to
// prod |l_i - l_j|^beta exp(-sum l_i^2 / 2); dividing by sqrt(beta)
// (recorded in eigenvalue_scale) gives the weight exp(-(beta/2) sum x_i^2).
inline MatrixSample sample_tridiag_beta(std::size_t n, int beta, std::uint64_t seed) {
  detail::require_size(n);
  if (!is_valid_beta(beta)) throw InvalidArgument("beta must be one of {1,2,4}");
  rng::Stream s(seed);
  Tridiagonal t;
  t.diag.resize(n);
  t.offdiag.resize(n - 1);
  for (auto& d : t.diag) d = s.normal();
  for (std::size_t k = 1; k < n; ++k) t.offdiag[k - 1] = std::sqrt(s.gamma(0.5 * beta * static_cast<double>(n - k)));
  return {Storage::Tridiagonal, std::move(t), EnsembleSpec{EnsembleKind::TridiagBeta, n, beta, seed}, 1,
          1.0 / std::sqrt(static_cast<double>(beta))};
}

inline MatrixSample sample(const EnsembleSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleKind::GOE: return sample_goe(spec.n, spec.seed);
    case EnsembleKind::GUE: return sample_gue(spec.n, spec.seed);
    case EnsembleKind::GSE: return sample_gse(spec.n, spec.seed);
    case EnsembleKind::WignerRealMatched: return sample_matched_wigner(spec.n, spec.seed, Symmetry::Real);
    case EnsembleKind::WignerHermitianMatched: return sample_matched_wigner(spec.n, spec.seed, Symmetry::Hermitian);
    case EnsembleKind::TridiagBeta: return sample_tridiag_beta(spec.n, spec.beta, spec.seed);
  }
  throw InvalidArgument("unknown ensemble kind");
}

// Stores a complex Hermitian sample as its real 2n x 2n embedding.
inline MatrixSample embed_real(const MatrixSample& m) {
  if (m.storage != Storage::ComplexHermitian) throw ShapeError("embed_real expects a complex Hermitian sample");
  return {Storage::RealEmbeddedHermitian, real_embedding(m.complex()), m.spec, 2 * m.multiplicity,
          m.eigenvalue_scale};
}

namespace detail {
inline void require_strictly_increasing(std::span<const double> v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i - 1] < v[i])) throw InvalidArgument(std::string(what) + " must be strictly increasing");
}
}  // namespace detail

// Merges two spectra and keeps the particles at positions 2, 4, ... (1-based).
inline std::vector<double> superpose_decimate_even(std::span<const double> a, std::span<const double> b) {
  detail::require_strictly_increasing(a, "first spectrum");
  detail::require_strictly_increasing(b, "second spectrum");
  std::vector<double> merged(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), merged.begin());
  for (std::size_t i = 1; i < merged.size(); ++i)
    if (merged[i - 1] == merged[i]) throw DegenerateInput("exact tie in superposed spectrum; resample");
  std::vector<double> out;
  out.reserve(merged.size() / 2);
  for (std::size_t i = 1; i < merged.size(); i += 2) out.push_back(merged[i]);
  return out;
}

// Even-position points of a GOE_{2n+1} spectrum scaled by 1/sqrt(2): a GSE_n spectrum.
inline std::vector<double> gse_from_goe(std::span<const double> goe) {
  if (goe.size() % 2 == 0) throw ShapeError("gse_from_goe expects an odd-length (2n+1) spectrum");
  detail::require_strictly_increasing(goe, "GOE spectrum");
  std::vector<double> out;
  out.reserve(goe.size() / 2);
  for (std::size_t i = 1; i < goe.size(); i += 2) out.push_back(goe[i] / std::numbers::sqrt2);
  return out;
}

}  // namespace wigner
