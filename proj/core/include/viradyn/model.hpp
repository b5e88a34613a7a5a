#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace viradyn {

/// Rate constants of the within-host model.
///
///   dT/dt  = s - d T - beta T V
///   dT*/dt = beta T V - m2 T*
///   dV/dt  = k T* - m1 V
///
/// Defaults use s = 10, which puts the infected equilibrium at
/// (240, 21.6667, 902.778). The alternative rate s = 100 is kept as
/// kTabulatedProductionRate.
struct ModelParams {
  double s = 10.0;       ///< production of healthy CD4+ cells, cells/mm^3/day
  double d = 0.02;       ///< death rate of healthy cells, 1/day
  double beta = 2.4e-5;  ///< infection rate constant, mm^3/day
  double k = 100.0;      ///< virions produced per infected cell per day
  double m1 = 2.4;       ///< virion clearance, 1/day
  double m2 = 0.24;      ///< infected-cell death rate, 1/day

  static constexpr double kTabulatedProductionRate = 100.0;

  /// Throws DomainError unless all six rates are finite and strictly positive.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

enum class ModelKind { Basic, TwoControl, Combined };

std::string_view to_string(ModelKind kind);
/// Accepts "basic", "two-control" (also "twocontrol", "two_control") and "combined".
ModelKind parse_model_kind(std::string_view name);

/// Drug efficacies. u1 scales infection (RTI), u2 scales virion production (PI).
/// The combined-efficacy model stores its single control in u2.
struct Efficacy {
  double u1 = 0.0;
  double u2 = 0.0;

  /// Throws DomainError unless both values lie in [0, 1].
  void validate() const;

  bool operator==(const Efficacy&) const = default;
};

/// A treatment window [start, end) with constant efficacy.
struct ScheduleSegment {
  double start = 0.0;
  double end = 0.0;
  Efficacy efficacy;

  bool operator==(const ScheduleSegment&) const = default;
};

/// Piecewise-constant efficacy over half-open windows. Outside every
/// window the efficacy is (0, 0).
class EfficacySchedule {
 public:
  EfficacySchedule() = default;
  /// Throws ConfigError/DomainError on unsorted, overlapping, empty or
  /// out-of-range segments.
  explicit EfficacySchedule(std::vector<ScheduleSegment> segments);

  Efficacy at(double t) const;

  std::span<const ScheduleSegment> segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

  /// Same windows, every segment's efficacy replaced by `efficacy`.
  EfficacySchedule with_efficacy(Efficacy efficacy) const;

  bool operator==(const EfficacySchedule&) const = default;

 private:
  std::vector<ScheduleSegment> segments_;
};

using StateVector = std::array<double, 3>;

/// (T, T*, V): healthy cells, infected cells, free virus.
struct SystemState {
  double T = 0.0;
  double T_star = 0.0;
  double V = 0.0;

  StateVector to_vector() const { return {T, T_star, V}; }
  static SystemState from_vector(const StateVector& v) { return {v[0], v[1], v[2]}; }

  bool operator==(const SystemState&) const = default;
};

struct EffectiveRates {
  double beta = 0.0;
  double k = 0.0;
};

/// Infection and production rates after treatment for the given model variant.
EffectiveRates effective_rates(ModelKind kind, const ModelParams& params, Efficacy efficacy);

/// Right-hand side with frozen efficacy. Throws NonFiniteStateError naming the
/// offending component.
SystemState rhs(ModelKind kind, const ModelParams& params, Efficacy efficacy,
                const SystemState& state);

/// Right-hand side with the efficacy resolved from `schedule` at time t.
SystemState rhs(ModelKind kind, const ModelParams& params, const EfficacySchedule& schedule,
                double t, const SystemState& state);

/// Autonomous vector field with frozen efficacy, in the shape the integrator expects.
class FrozenField {
 public:
  FrozenField(ModelKind kind, const ModelParams& params, Efficacy efficacy);

  StateVector operator()(double /*t*/, const StateVector& w) const;

 private:
  ModelParams params_;
  EffectiveRates rates_;
};

/// Time-dependent vector field that resolves the schedule at every evaluation.
class ScheduledField {
 public:
  ScheduledField(ModelKind kind, const ModelParams& params, EfficacySchedule schedule);

  StateVector operator()(double t, const StateVector& w) const;

  /// The autonomous field with the efficacy active at t frozen in.
  FrozenField frozen_at(double t) const;

 private:
  ModelKind kind_;
  ModelParams params_;
  EfficacySchedule schedule_;
};

}  // namespace viradyn
