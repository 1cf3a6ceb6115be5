#pragma once

#include <stdexcept>
#include <string>

namespace cflow {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text. `position` is a 0-based offset into the input.
struct SyntaxError : Error {
  SyntaxError(const std::string& msg, std::size_t pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

/// Leaf indices of a bracket expression are not a permutation of 1..k.
struct IndexError : Error { using Error::Error; };
/// Operand count does not match the arity of an expression.
struct ArityError : Error { using Error::Error; };
/// Mismatched dimensions (component counts, matrix sizes, point sizes).
struct DimensionError : Error { using Error::Error; };
/// Input outside the declared domain of an operation.
struct DomainError : Error { using Error::Error; };
/// A pointwise evaluation failed (pole, non-finite value, failed node).
struct EvalError : Error { using Error::Error; };
/// A trajectory left its domain box; the map is only locally defined.
struct EscapeError : Error { using Error::Error; };
/// Adaptive integration could not meet its tolerances.
struct ToleranceError : Error { using Error::Error; };
/// Newton inversion of a local map did not converge.
struct InverseError : Error { using Error::Error; };
/// Richardson extrapolation diverged; estimates are noise-dominated.
struct NoiseError : Error { using Error::Error; };
/// A matrix that must be invertible is singular to working precision.
struct SingularError : Error { using Error::Error; };
/// Non-finite values in matrix arithmetic.
struct OverflowError : Error { using Error::Error; };
/// Requested derivative order above the supported limit.
struct UnsupportedOrderError : Error { using Error::Error; };
/// Invalid or incomplete campaign configuration.
struct ConfigError : Error { using Error::Error; };
/// File system failure while reading or writing artifacts.
struct IoError : Error { using Error::Error; };

}  // namespace cflow
