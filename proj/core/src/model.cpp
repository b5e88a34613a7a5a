#include "viradyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "viradyn/errors.hpp"

namespace viradyn {
namespace {

void require_positive(const char* name, double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream os;
    os << "model parameter " << name << " must be finite and > 0, got " << value;
    throw DomainError(os.str());
  }
}

void require_unit_interval(const char* name, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream os;
    os << "efficacy " << name << " must lie in [0, 1], got " << value;
    throw DomainError(os.str());
  }
}

void require_finite_state(const StateVector& w) {
  static constexpr const char* kNames[] = {"T", "Tstar", "V"};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) throw NonFiniteStateError(kNames[i], w[i]);
  }
}

// Single arithmetic path shared by every rhs entry point, so frozen and
// scheduled fields agree bit for bit.
StateVector evaluate(const ModelParams& p, EffectiveRates rates, const StateVector& w) {
  require_finite_state(w);
  const double infection = rates.beta * w[0] * w[2];
  return {p.s - p.d * w[0] - infection,
          infection - p.m2 * w[1],
          rates.k * w[1] - p.m1 * w[2]};
}

}  // namespace

void ModelParams::validate() const {
  require_positive("s", s);
  require_positive("d", d);
  require_positive("beta", beta);
  require_positive("k", k);
  require_positive("m1", m1);
  require_positive("m2", m2);
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Basic: return "basic";
    case ModelKind::TwoControl: return "two-control";
    case ModelKind::Combined: return "combined";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "basic") return ModelKind::Basic;
  if (name == "two-control" || name == "twocontrol" || name == "two_control") {
    return ModelKind::TwoControl;
  }
  if (name == "combined") return ModelKind::Combined;
  throw ConfigError("unknown model kind '" + std::string(name) +
                    "' (expected basic, two-control or combined)");
}

void Efficacy::validate() const {
  require_unit_interval("u1", u1);
  require_unit_interval("u2", u2);
}

EfficacySchedule::EfficacySchedule(std::vector<ScheduleSegment> segments)
    : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    if (!std::isfinite(seg.start) || !std::isfinite(seg.end) || !(seg.start < seg.end)) {
      std::ostringstream os;
      os << "schedule segment " << i << " must satisfy start < end, got [" << seg.start << ", "
         << seg.end << ")";
      throw ConfigError(os.str());
    }
    seg.efficacy.validate();
    if (i > 0 && seg.start < segments_[i - 1].end) {
      std::ostringstream os;
      os << "schedule segment " << i << " [" << seg.start << ", " << seg.end
         << ") overlaps or precedes segment " << i - 1 << " [" << segments_[i - 1].start << ", "
         << segments_[i - 1].end << ")";
      throw ConfigError(os.str());
    }
  }
}

Efficacy EfficacySchedule::at(double t) const {
  // First segment whose end lies beyond t; half-open windows.
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double time, const ScheduleSegment& s) { return time < s.end; });
  if (it != segments_.end() && it->start <= t) return it->efficacy;
  return {};
}

EfficacySchedule EfficacySchedule::with_efficacy(Efficacy efficacy) const {
  auto segments = segments_;
  for (auto& seg : segments) seg.efficacy = efficacy;
  return EfficacySchedule(std::move(segments));
}

EffectiveRates effective_rates(ModelKind kind, const ModelParams& params, Efficacy efficacy) {
  efficacy.validate();
  switch (kind) {
    case ModelKind::Basic: return {params.beta, params.k};
    case ModelKind::TwoControl:
      return {(1.0 - efficacy.u1) * params.beta, (1.0 - efficacy.u2) * params.k};
    case ModelKind::Combined: return {params.beta, (1.0 - efficacy.u2) * params.k};
  }
  return {params.beta, params.k};
}

SystemState rhs(ModelKind kind, const ModelParams& params, Efficacy efficacy,
                const SystemState& state) {
  return SystemState::from_vector(
      evaluate(params, effective_rates(kind, params, efficacy), state.to_vector()));
}

SystemState rhs(ModelKind kind, const ModelParams& params, const EfficacySchedule& schedule,
                double t, const SystemState& state) {
  if (!std::isfinite(t)) throw DomainError("rhs evaluated at non-finite time");
  return rhs(kind, params, schedule.at(t), state);
}

FrozenField::FrozenField(ModelKind kind, const ModelParams& params, Efficacy efficacy)
    : params_(params), rates_(effective_rates(kind, params, efficacy)) {}

StateVector FrozenField::operator()(double, const StateVector& w) const {
  return evaluate(params_, rates_, w);
}

ScheduledField::ScheduledField(ModelKind kind, const ModelParams& params,
                               EfficacySchedule schedule)
    : kind_(kind), params_(params), schedule_(std::move(schedule)) {}

StateVector ScheduledField::operator()(double t, const StateVector& w) const {
  return rhs(kind_, params_, schedule_, t, SystemState::from_vector(w)).to_vector();
}

FrozenField ScheduledField::frozen_at(double t) const {
  return FrozenField(kind_, params_, schedule_.at(t));
}

}  // namespace viradyn
