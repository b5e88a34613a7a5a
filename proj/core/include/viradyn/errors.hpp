#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace viradyn {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration: parameters, mesh, schedule, flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value outside its mathematical domain, e.g. an efficacy not in [0, 1].
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// An operation was called on inputs that violate its precondition.
class PreconditionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Failures arising from the numerics rather than from the inputs' shape.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A state vector handed to a right-hand side contains NaN or infinity.
class NonFiniteStateError : public NumericalError {
 public:
  NonFiniteStateError(std::string component, double value);

  const std::string& component() const noexcept { return component_; }
  double value() const noexcept { return value_; }

 private:
  std::string component_;
  double value_;
};

/// An RK4 stage produced a non-finite value.
///
/// Carries the time of the failing step, the stage (1..4) and, once the mesh
/// driver has seen it, the step index. Scenario drivers attach their label and
/// dosage level index on the way out.
class IntegrationBlowup : public NumericalError {
 public:
  IntegrationBlowup(double time, int stage, std::optional<std::size_t> step = std::nullopt,
                    std::string label = {}, std::optional<std::size_t> level = std::nullopt);

  double time() const noexcept { return time_; }
  int stage() const noexcept { return stage_; }
  std::optional<std::size_t> step() const noexcept { return step_; }
  const std::string& label() const noexcept { return label_; }
  std::optional<std::size_t> level() const noexcept { return level_; }

  IntegrationBlowup with_step(std::size_t step) const;
  IntegrationBlowup with_label(std::string label) const;
  IntegrationBlowup with_level(std::size_t level) const;

 private:
  double time_;
  int stage_;
  std::optional<std::size_t> step_;
  std::string label_;
  std::optional<std::size_t> level_;
};

/// Repeated eigenvalue whose eigenspace is smaller than its multiplicity.
class DefectiveMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Eigenvector basis too close to singular to fit modal coefficients.
class ConditioningError : public NumericalError {
 public:
  ConditioningError(double condition_number, double limit);
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace viradyn
