#pragma once

#include <stdexcept>
#include <string>

namespace loschmidt {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so numerical failures and precondition violations stay distinct.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches, non-power-of-two sizes, exceeded size caps.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition does not hold (non-Hermitian input, odd kick
// count for a half-time sequence, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Failures of the numerics themselves rather than of the inputs.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Iterative numerics that hit their cap. Carries the best residual reached.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

enum class FitFailure {
  no_peak,
  no_decay_window,
  insufficient_points,
  insufficient_tail,
  not_converged,
};

const char* to_string(FitFailure f) noexcept;

class FitError : public NumericalError {
 public:
  FitError(FitFailure kind, const std::string& what, double residual = 0.0)
      : NumericalError(what), kind_(kind), residual_(residual) {}
  FitFailure kind() const noexcept { return kind_; }
  double residual() const noexcept { return residual_; }

 private:
  FitFailure kind_;
  double residual_;
};

}  // namespace loschmidt
