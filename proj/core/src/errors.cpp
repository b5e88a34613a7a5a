#include "viradyn/errors.hpp"

#include <sstream>

namespace viradyn {
namespace {

std::string blowup_message(double time, int stage, std::optional<std::size_t> step,
                           const std::string& label, std::optional<std::size_t> level) {
  std::ostringstream os;
  os << "integration blow-up: non-finite value in RK4 stage " << stage << " at t=" << time;
  if (step) os << " (step " << *step << ")";
  if (!label.empty()) os << " in scenario '" << label << "'";
  if (level) os << " at dosage level " << *level;
  return os.str();
}

}  // namespace

NonFiniteStateError::NonFiniteStateError(std::string component, double value)
    : NumericalError("non-finite state component " + component + " = " + std::to_string(value)),
      component_(std::move(component)),
      value_(value) {}

IntegrationBlowup::IntegrationBlowup(double time, int stage, std::optional<std::size_t> step,
                                     std::string label, std::optional<std::size_t> level)
    : NumericalError(blowup_message(time, stage, step, label, level)),
      time_(time),
      stage_(stage),
      step_(step),
      label_(std::move(label)),
      level_(level) {}

IntegrationBlowup IntegrationBlowup::with_step(std::size_t step) const {
  return IntegrationBlowup(time_, stage_, step, label_, level_);
}

IntegrationBlowup IntegrationBlowup::with_label(std::string label) const {
  return IntegrationBlowup(time_, stage_, step_, std::move(label), level_);
}

IntegrationBlowup IntegrationBlowup::with_level(std::size_t level) const {
  return IntegrationBlowup(time_, stage_, step_, label_, level);
}

ConditioningError::ConditioningError(double condition_number, double limit)
    : NumericalError("eigenvector matrix is ill-conditioned: condition number " +
                     std::to_string(condition_number) + " exceeds " + std::to_string(limit)),
      condition_number_(condition_number) {}

}  // namespace viradyn
