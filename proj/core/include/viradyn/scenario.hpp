#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viradyn/analysis.hpp"
#include "viradyn/integrator.hpp"
#include "viradyn/model.hpp"

namespace viradyn {

using HivTrajectory = Trajectory<3>;

/// One simulation: model variant, rates, mesh, initial state and treatment.
/// Defaults give the untreated model on [0, 400] with h = 0.1 from (1200, 0, 100).
struct ScenarioConfig {
  ModelKind kind = ModelKind::Basic;
  ModelParams params;
  MeshSpec mesh;
  SystemState initial{1200.0, 0.0, 100.0};
  EfficacySchedule schedule;
  std::string label = "scenario";

  /// Params and mesh valid, initial state finite and componentwise >= 0,
  /// every schedule boundary a mesh point inside [a, b].
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

inline constexpr double kSuppressionThreshold = 50.0;  ///< copies/mm^3
inline constexpr double kReboundFactor = 2.0;

struct TimedValue {
  double value = 0.0;
  double day = 0.0;

  bool operator==(const TimedValue&) const = default;
};

struct MetricSet {
  SystemState final_state;
  TimedValue peak_viral_load;
  /// Minimum of V over mesh points inside any treatment window; empty when untreated.
  std::optional<TimedValue> min_viral_load_during_treatment;
  /// Total length of mesh intervals whose left end has V < 50.
  double suppression_days = 0.0;
  /// First mesh time after the last window closes with V >= 2 V(end of treatment).
  std::optional<double> rebound_day;

  bool operator==(const MetricSet&) const = default;
};

MetricSet compute_metrics(const HivTrajectory& trajectory, const EfficacySchedule& schedule);

struct ScenarioResult {
  HivTrajectory trajectory;
  MetricSet metrics;
  std::vector<NegativeExcursion> warnings;
};

/// Integrates the configured model. On each step the efficacy in force on that
/// step is used for all four RK4 stages, so a treatment switch on a mesh point
/// does not leak into the preceding step. Integrator failures are rethrown with
/// the scenario label attached.
ScenarioResult run(const ScenarioConfig& config);

/// One run per efficacy level, with every schedule window set to that level.
/// Levels run concurrently; results keep the input order.
std::vector<ScenarioResult> run_matrix(const ScenarioConfig& base, std::span<const Efficacy> levels);

struct LinearizationComparison {
  Equilibrium equilibrium;
  Vector3 perturbation{};
  HivTrajectory nonlinear;          ///< absolute states from equilibrium + perturbation
  std::vector<Vector3> linearized;  ///< perturbation predicted by the linear system
  Vector3 max_abs_discrepancy{};    ///< per component, over the mesh
  double max_norm_discrepancy = 0.0;
  double perturbation_norm = 0.0;
};

/// Runs the untreated model from infected equilibrium + perturbation over
/// config.mesh and compares with the linearized solution at the same times.
/// config.initial and config.schedule are not used. Requires the Basic model,
/// an infected equilibrium, and |perturbation_i| <= 10.
LinearizationComparison compare_linearization(const ScenarioConfig& config,
                                              const Vector3& perturbation);

double euclidean_norm(const Vector3& v);

namespace presets {

inline constexpr double kTreatmentStart = 150.0;
inline constexpr double kTreatmentEnd = 400.0;

/// Initial conditions used for the untreated runs.
std::vector<SystemState> initial_conditions();

/// Untreated model from each initial condition over [0, horizon].
std::vector<ScenarioConfig> basic_convergence(double horizon = 1000.0);

/// Treatment on [150, 400) (or [150, horizon) when continuous) at a placeholder
/// zero efficacy; combine with run_matrix and one of the level lists below.
ScenarioConfig treatment(ModelKind kind, bool continuous, double horizon);

/// Shared dosage u for both RTI and PI: 0, 0.2, 0.3, 0.5.
std::vector<Efficacy> two_control_levels();
/// Combined efficacy U stored in u2: 0, 0.4, 0.6, 0.7.
std::vector<Efficacy> combined_levels();

}  // namespace presets

}  // namespace viradyn
