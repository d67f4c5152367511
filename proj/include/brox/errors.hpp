#pragma once

#include <stdexcept>
#include <string>

namespace brox {

/// Invalid input: dimension mismatch, out-of-range parameter, malformed spec.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested operation is not defined for this input (e.g. grid oracle in d > 3).
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical kernel (SVD, factorization) failed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver ran out of budget. `step()` is the outer iteration index
/// when the failure happened inside a method loop, -1 otherwise.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what, int step = -1)
      : std::runtime_error(what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// The counterexample search exhausted its seed range.
class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace brox
