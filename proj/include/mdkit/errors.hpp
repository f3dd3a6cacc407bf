#pragma once

#include <stdexcept>
#include <string>

#include "mdkit/types.hpp"

namespace mdkit {

/// Violated operation precondition (bad grid, non-resonant parameters, eps = 0 for shooting, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A theorem hypothesis does not hold (alpha = 0, a1 = b1 = 0).
class HypothesisViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class IntegrationStatus {
  step_size_underflow,
  max_steps_exceeded,
  blow_up,
  non_finite,
};

[[nodiscard]] const char* to_string(IntegrationStatus status);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(IntegrationStatus status, double t, const std::string& what)
      : std::runtime_error(what), status_(status), t_(t) {}

  [[nodiscard]] IntegrationStatus status() const { return status_; }
  /// Time reached before the failure.
  [[nodiscard]] double time() const { return t_; }

 private:
  IntegrationStatus status_;
  double t_;
};

/// Monodromy determinant too far from 1 for the trace criterion to be trusted.
class IntegrationQualityError : public std::runtime_error {
 public:
  IntegrationQualityError(double det, const std::string& what)
      : std::runtime_error(what), det_(det) {}
  [[nodiscard]] double det() const { return det_; }

 private:
  double det_;
};

/// Iterative solver gave up. Carries the best iterate seen.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(State best, double best_residual, int iterations, const std::string& what)
      : std::runtime_error(what), best_(best), best_residual_(best_residual), iterations_(iterations) {}

  [[nodiscard]] State best_iterate() const { return best_; }
  [[nodiscard]] double best_residual() const { return best_residual_; }
  [[nodiscard]] int iterations() const { return iterations_; }

 private:
  State best_;
  double best_residual_;
  int iterations_;
};

class SingularSystem : public NoConvergence {
 public:
  using NoConvergence::NoConvergence;
};

/// Bracket without a sign change of |tr M| - 2.
class NoSignChange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace mdkit
