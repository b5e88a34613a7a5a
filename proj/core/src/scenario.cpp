#include "viradyn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "viradyn/errors.hpp"

namespace viradyn {
namespace {

constexpr double kTimeTol = 1e-9;

double time_tol(double t) { return kTimeTol * std::max(1.0, std::abs(t)); }

// First index whose time is at or after t (within tolerance).
std::size_t first_index_at_or_after(const std::vector<double>& times, double t) {
  const double cut = t - time_tol(t);
  return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), cut) -
                                  times.begin());
}

}  // namespace

double euclidean_norm(const Vector3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void ScenarioConfig::validate() const {
  params.validate();
  mesh.validate();
  const StateVector x = initial.to_vector();
  static constexpr const char* kNames[] = {"T", "Tstar", "V"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!std::isfinite(x[i])) throw NonFiniteStateError(kNames[i], x[i]);
    if (x[i] < 0.0) {
      std::ostringstream os;
      os << "initial " << kNames[i] << " must be >= 0, got " << x[i];
      throw ConfigError(os.str());
    }
  }
  for (const auto& seg : schedule.segments()) {
    if (seg.start < mesh.a - time_tol(mesh.a) || seg.end > mesh.b + time_tol(mesh.b)) {
      std::ostringstream os;
      os << "treatment window [" << seg.start << ", " << seg.end << ") lies outside the mesh ["
         << mesh.a << ", " << mesh.b << "]";
      throw ConfigError(os.str());
    }
    for (double edge : {seg.start, seg.end}) {
      if (!mesh.is_mesh_point(edge)) {
        std::ostringstream os;
        os << "treatment boundary " << edge << " is not a mesh point (h=" << mesh.h << ")";
        throw ConfigError(os.str());
      }
    }
  }
}

MetricSet compute_metrics(const HivTrajectory& trajectory, const EfficacySchedule& schedule) {
  const auto& times = trajectory.times;
  const auto& states = trajectory.states;
  if (times.empty()) throw PreconditionError("cannot compute metrics of an empty trajectory");

  MetricSet m;
  m.final_state = SystemState::from_vector(states.back());

  m.peak_viral_load = {states[0][2], times[0]};
  for (std::size_t j = 1; j < states.size(); ++j) {
    if (states[j][2] > m.peak_viral_load.value) m.peak_viral_load = {states[j][2], times[j]};
  }

  for (std::size_t j = 0; j + 1 < states.size(); ++j) {
    if (states[j][2] < kSuppressionThreshold) m.suppression_days += times[j + 1] - times[j];
  }

  const auto segments = schedule.segments();
  for (const auto& seg : segments) {
    const std::size_t lo = first_index_at_or_after(times, seg.start);
    const std::size_t hi = std::min(first_index_at_or_after(times, seg.end), states.size());
    for (std::size_t j = lo; j < hi; ++j) {
      const double v = states[j][2];
      if (!m.min_viral_load_during_treatment || v < m.min_viral_load_during_treatment->value) {
        m.min_viral_load_during_treatment = TimedValue{v, times[j]};
      }
    }
  }

  if (!segments.empty()) {
    const std::size_t end = first_index_at_or_after(times, segments.back().end);
    if (end < states.size()) {
      const double threshold = kReboundFactor * states[end][2];
      for (std::size_t j = end + 1; j < states.size(); ++j) {
        if (states[j][2] >= threshold) {
          m.rebound_day = times[j];
          break;
        }
      }
    }
  }
  return m;
}

ScenarioResult run(const ScenarioConfig& config) {
  config.validate();
  const ScheduledField field(config.kind, config.params, config.schedule);
  const double h = config.mesh.h;

  ScenarioResult result;
  try {
    result.trajectory = integrate_stepwise(
        [&field, h](double t) { return field.frozen_at(t + 0.5 * h); }, config.mesh,
        config.initial.to_vector());
  } catch (const IntegrationBlowup& e) {
    throw e.with_label(config.label);
  }
  result.metrics = compute_metrics(result.trajectory, config.schedule);
  result.warnings = find_negative_excursions(result.trajectory);
  return result;
}

std::vector<ScenarioResult> run_matrix(const ScenarioConfig& base,
                                       std::span<const Efficacy> levels) {
  if (levels.empty()) throw PreconditionError("run_matrix needs at least one efficacy level");

  std::vector<ScenarioConfig> configs;
  configs.reserve(levels.size());
  for (const Efficacy& level : levels) {
    ScenarioConfig c = base;
    c.schedule = base.schedule.with_efficacy(level);
    configs.push_back(std::move(c));
  }

  std::vector<std::future<ScenarioResult>> pending;
  pending.reserve(configs.size());
  for (const auto& c : configs) {
    pending.push_back(std::async(std::launch::async, [&c] { return run(c); }));
  }

  std::vector<ScenarioResult> results;
  results.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    try {
      results.push_back(pending[i].get());
    } catch (const IntegrationBlowup& e) {
      for (std::size_t k = i + 1; k < pending.size(); ++k) pending[k].wait();
      throw e.with_level(i);
    }
  }
  return results;
}

LinearizationComparison compare_linearization(const ScenarioConfig& config,
                                              const Vector3& perturbation) {
  if (config.kind != ModelKind::Basic) {
    throw PreconditionError("linearization comparison is defined for the basic model only");
  }
  for (double x : perturbation) {
    if (!std::isfinite(x) || std::abs(x) > 10.0) {
      throw PreconditionError("perturbation components must be finite with magnitude <= 10");
    }
  }
  config.params.validate();
  config.mesh.validate();

  const auto points = equilibria(config.params, {}, ModelKind::Basic);
  const auto infected = std::find_if(points.begin(), points.end(), [](const Equilibrium& e) {
    return e.kind == EquilibriumKind::Infected;
  });
  if (infected == points.end()) {
    throw PreconditionError("no infected equilibrium exists for these parameters");
  }

  LinearizationComparison out;
  out.equilibrium = *infected;
  out.perturbation = perturbation;
  out.perturbation_norm = euclidean_norm(perturbation);

  const Matrix3 j = jacobian(config.params, {}, ModelKind::Basic, infected->point);
  const LinearizedSolution linear = fit_linearized(eigen3(j), perturbation);

  const StateVector eq = infected->point.to_vector();
  const StateVector start{eq[0] + perturbation[0], eq[1] + perturbation[1],
                          eq[2] + perturbation[2]};
  out.nonlinear = integrate(FrozenField(ModelKind::Basic, config.params, {}), config.mesh, start);

  out.linearized.reserve(out.nonlinear.size());
  for (std::size_t n = 0; n < out.nonlinear.size(); ++n) {
    const Vector3 predicted = evaluate_linearized(linear, out.nonlinear.times[n] - config.mesh.a);
    out.linearized.push_back(predicted);
    Vector3 diff{};
    for (std::size_t i = 0; i < 3; ++i) {
      diff[i] = out.nonlinear.states[n][i] - eq[i] - predicted[i];
      out.max_abs_discrepancy[i] = std::max(out.max_abs_discrepancy[i], std::abs(diff[i]));
    }
    out.max_norm_discrepancy = std::max(out.max_norm_discrepancy, euclidean_norm(diff));
  }
  return out;
}

namespace presets {

std::vector<SystemState> initial_conditions() {
  return {{500.0, 1e-6, 60.0}, {800.0, 10.0, 70.0}, {1000.0, 50.0, 30.0}, {1200.0, 0.0, 100.0}};
}

std::vector<ScenarioConfig> basic_convergence(double horizon) {
  std::vector<ScenarioConfig> out;
  int n = 1;
  for (const auto& ic : initial_conditions()) {
    ScenarioConfig c;
    c.mesh = {0.0, horizon, 0.1};
    c.initial = ic;
    c.label = "basic_ic" + std::to_string(n++);
    out.push_back(std::move(c));
  }
  return out;
}

ScenarioConfig treatment(ModelKind kind, bool continuous, double horizon) {
  ScenarioConfig c;
  c.kind = kind;
  c.mesh = {0.0, horizon, 0.1};
  c.schedule = EfficacySchedule(
      {{kTreatmentStart, continuous ? horizon : kTreatmentEnd, Efficacy{}}});
  c.label = std::string(to_string(kind)) + (continuous ? "_continuous" : "_window");
  return c;
}

std::vector<Efficacy> two_control_levels() {
  return {{0.0, 0.0}, {0.2, 0.2}, {0.3, 0.3}, {0.5, 0.5}};
}

std::vector<Efficacy> combined_levels() {
  return {{0.0, 0.0}, {0.0, 0.4}, {0.0, 0.6}, {0.0, 0.7}};
}

}  // namespace presets

}  // namespace viradyn
