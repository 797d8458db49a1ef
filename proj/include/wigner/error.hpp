#pragma once

#include <stdexcept>
#include <string>

namespace wigner {

// Precondition violated by the caller: bad size, bad index, bad interval.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (G(t) for |t| > 1, ...).
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Mismatched lengths or matrix shapes, non-symmetric input.
class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Inputs that are valid in principle but hit a probability-zero event (exact ties).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iteration did not converge, a quadrature missed its tolerance, a value overflowed.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Nystrom matrix whose spectrum left [-eps, 1 + eps]; raise the quadrature order.
class DiscretizationFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace wigner
