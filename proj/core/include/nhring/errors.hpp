#pragma once

#include <stdexcept>
#include <string>

namespace nhring {

// Rejected input: negative strengths, empty windows, zero ramp rates, ...
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bisection bracket whose endpoints do not straddle the predicate change.
class BracketInvalid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for every failure of a numerical procedure (as opposed to bad input).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class StepUnderflow : public NumericalFailure {
 public:
  StepUnderflow(const std::string& what, double tau, double step)
      : NumericalFailure(what), tau_(tau), step_(step) {}

  double tau() const noexcept { return tau_; }
  double step() const noexcept { return step_; }

 private:
  double tau_;
  double step_;
};

// Probability leaked into the outermost modes of the truncation window.
class BoundaryMassExceeded : public NumericalFailure {
 public:
  BoundaryMassExceeded(const std::string& what, double tau, double fraction)
      : NumericalFailure(what), tau_(tau), fraction_(fraction) {}

  double tau() const noexcept { return tau_; }
  double fraction() const noexcept { return fraction_; }

 private:
  double tau_;
  double fraction_;
};

}  // namespace nhring
