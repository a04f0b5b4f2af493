#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fungibility {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or a caller-supplied argument violates a documented contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver hit its iteration cap before the series term fell
/// under the threshold.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

/// An internal invariant broke (for example a singular I - Q after pruning).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fungibility
