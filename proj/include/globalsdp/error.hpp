#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace globalsdp {

/// Caller violated a precondition (dimension mismatch, bad option, malformed
/// input). The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (iteration cap, breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky hit a non-positive pivot.
class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : NumericalError("matrix is not positive definite (pivot " +
                       std::to_string(pivot) +
                       " = " + std::to_string(value) + ")"),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// A user-supplied constraint map returned something unusable.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An instance could not be constructed from the given data.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The solver refused an instance that fails the assumption check.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace globalsdp
