#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "wigner/error.hpp"

namespace wigner {

using Complex = std::complex<double>;

// Square row-major matrix. Deliberately minimal: the library only needs
// element access and contiguous rows for the Householder sweeps.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, T{}) {}

  std::size_t size() const noexcept { return n_; }
  T& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  std::span<T> row(std::size_t i) noexcept { return {a_.data() + i * n_, n_}; }
  std::span<const T> row(std::size_t i) const noexcept { return {a_.data() + i * n_, n_}; }
  T* data() noexcept { return a_.data(); }
  const T* data() const noexcept { return a_.data(); }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> a_;
};

using RealMatrix = SquareMatrix<double>;
using ComplexMatrix = SquareMatrix<Complex>;

// Symmetric tridiagonal matrix: diag has length n, offdiag length n - 1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t size() const noexcept { return diag.size(); }

  void validate() const {
    if (diag.empty()) throw ShapeError("tridiagonal matrix must have n >= 1");
    if (offdiag.size() + 1 != diag.size())
      throw ShapeError("tridiagonal off-diagonal length must be n - 1");
    for (double v : diag)
      if (!std::isfinite(v)) throw InvalidArgument("tridiagonal diagonal contains a non-finite entry");
    for (double v : offdiag)
      if (!std::isfinite(v)) throw InvalidArgument("tridiagonal off-diagonal contains a non-finite entry");
  }

  friend bool operator==(const Tridiagonal&, const Tridiagonal&) = default;
};

inline bool is_exactly_symmetric(const RealMatrix& a) noexcept {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (!(a(i, j) == a(j, i))) return false;
  return true;
}

inline bool is_exactly_hermitian(const ComplexMatrix& a) noexcept {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a(i, i).imag() != 0.0) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (!(a(i, j) == std::conj(a(j, i)))) return false;
  }
  return true;
}

// Real symmetric 2n x 2n form [[Re H, -Im H], [Im H, Re H]] of a Hermitian H.
// Every eigenvalue of H appears twice in the embedding.
inline RealMatrix real_embedding(const ComplexMatrix& h) {
  const std::size_t n = h.size();
  RealMatrix r(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Complex z = h(i, j);
      r(i, j) = z.real();
      r(i + n, j + n) = z.real();
      r(i, j + n) = -z.imag();
      r(i + n, j) = z.imag();
    }
  return r;
}

}  // namespace wigner
