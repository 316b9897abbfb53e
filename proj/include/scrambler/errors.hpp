#pragma once

#include <stdexcept>
#include <string>

namespace scrambler {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the supported range (e.g. k for NC(k) enumeration).
struct BoundsError : Error {
  using Error::Error;
};

/// Mismatched sizes: permutations of different k, gates of different d, ...
struct ShapeError : Error {
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (crossing permutation, gamma <= 0, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Moebius function queried for a pair that is not ordered.
struct OrderError : Error {
  using Error::Error;
};

/// The requested object would exceed a memory or runtime guard.
struct CapacityError : Error {
  using Error::Error;
};

/// A matrix that must be unitary (or a local factor) failed validation.
struct ValidationError : Error {
  using Error::Error;
};

/// Numerical post-condition violated (reconstruction residual, ill-conditioning).
struct NumericalError : Error {
  using Error::Error;
};

/// Leading nontrivial channel mode is degenerate; carries the measured gap.
struct DegeneracyError : Error {
  DegeneracyError(const std::string& what, double gap_value) : Error(what), gap(gap_value) {}
  double gap;
};

}  // namespace scrambler
