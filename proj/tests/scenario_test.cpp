#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "viradyn/errors.hpp"
#include "viradyn/scenario.hpp"

namespace viradyn {
namespace {

using testing::seeded;
using testing::uniform;

double v_at(const HivTrajectory& traj, double t) {
  return traj.states.at(MeshSpec{traj.times.front(), traj.times.back(), traj.times[1] - traj.times[0]}
                            .index_of(t))[2];
}

TEST(Run, DefaultScenarioShape) {
  const auto result = run(ScenarioConfig{});
  ASSERT_EQ(result.trajectory.size(), 4001u);
  EXPECT_EQ(result.trajectory.states[0], (StateVector{1200.0, 0.0, 100.0}));
  EXPECT_FALSE(result.metrics.min_viral_load_during_treatment);
  EXPECT_FALSE(result.metrics.rebound_day);
  EXPECT_TRUE(result.warnings.empty());
}

TEST(Run, TwoControlWithoutTreatmentIsBasicBitForBit) {
  ScenarioConfig basic;
  ScenarioConfig two = basic;
  two.kind = ModelKind::TwoControl;
  const auto a = run(basic), b = run(two);
  EXPECT_EQ(a.trajectory.states, b.trajectory.states);
  EXPECT_EQ(a.metrics, b.metrics);
}

TEST(Run, UntreatedPeakMatchesIndependentIntegration) {
  // Frozen from a NumPy RK4 implementation at h = 0.1.
  const auto m = run(ScenarioConfig{}).metrics;
  EXPECT_NEAR(m.peak_viral_load.value, 18367.0, 1.0);
  EXPECT_NEAR(m.peak_viral_load.day, 13.3, 1e-9);
}

TEST(Run, CombinedWindowSuppressesAndRebounds) {
  ScenarioConfig c = presets::treatment(ModelKind::Combined, false, 600.0);
  c.schedule = c.schedule.with_efficacy({0.0, 0.7});
  const auto r = run(c);
  const double v150 = v_at(r.trajectory, 150.0);
  ASSERT_TRUE(r.metrics.min_viral_load_during_treatment);
  EXPECT_LT(r.metrics.min_viral_load_during_treatment->value, v150 / 10);
  ASSERT_TRUE(r.metrics.rebound_day);
  EXPECT_GT(*r.metrics.rebound_day, 400.0);
  EXPECT_NEAR(v150, 780.0, 1.0);
}

TEST(Run, FullPiBlocksVirusProduction) {
  // u2 = 1 in the combined model: V decays at rate m1 during treatment.
  ScenarioConfig c = presets::treatment(ModelKind::Combined, true, 200.0);
  c.schedule = c.schedule.with_efficacy({0.0, 1.0});
  const auto r = run(c);
  const double v150 = v_at(r.trajectory, 150.0);
  const double v160 = v_at(r.trajectory, 160.0);
  EXPECT_NEAR(v160 / v150, std::exp(-2.4 * 10.0), 1e-6);
}

TEST(Run, RejectsInvalidConfigs) {
  ScenarioConfig c;
  c.initial.V = -1.0;
  EXPECT_THROW(run(c), ConfigError);
  c = ScenarioConfig{};
  c.schedule = EfficacySchedule({{150.05, 400.0, {0.3, 0.3}}});
  EXPECT_THROW(run(c), ConfigError);
  c.schedule = EfficacySchedule({{150.0, 500.0, {0.3, 0.3}}});
  EXPECT_THROW(run(c), ConfigError);
  c = ScenarioConfig{};
  c.mesh.h = 0.3;
  EXPECT_THROW(run(c), ConfigError);
  c = ScenarioConfig{};
  c.params.beta = 0.0;
  EXPECT_THROW(run(c), DomainError);
}

TEST(Run, BlowupCarriesScenarioLabel) {
  ScenarioConfig c;
  c.params.beta = 50.0;
  c.mesh = {0.0, 50.0, 1.0};
  c.label = "runaway";
  try {
    run(c);
    FAIL() << "expected IntegrationBlowup";
  } catch (const IntegrationBlowup& e) {
    EXPECT_EQ(e.label(), "runaway");
    EXPECT_TRUE(e.step());
  }
}

TEST(RunMatrix, KeepsOrderAndMatchesIndividualRuns) {
  const ScenarioConfig base = presets::treatment(ModelKind::TwoControl, false, 500.0);
  const auto levels = presets::two_control_levels();
  const auto results = run_matrix(base, levels);
  ASSERT_EQ(results.size(), levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ScenarioConfig c = base;
    c.schedule = base.schedule.with_efficacy(levels[i]);
    EXPECT_EQ(results[i].trajectory.states, run(c).trajectory.states) << i;
  }
}

TEST(RunMatrix, StrongerTherapyNeverRaisesTheTroughOrShortensSuppression) {
  for (auto kind : {ModelKind::TwoControl, ModelKind::Combined}) {
    const auto levels =
        kind == ModelKind::TwoControl ? presets::two_control_levels() : presets::combined_levels();
    const auto results = run_matrix(presets::treatment(kind, false, 600.0), levels);
    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
      EXPECT_GE(results[i].metrics.min_viral_load_during_treatment->value,
                results[i + 1].metrics.min_viral_load_during_treatment->value);
      EXPECT_LE(results[i].metrics.suppression_days, results[i + 1].metrics.suppression_days);
    }
  }
}

TEST(RunMatrix, FrozenTwoControlSuppressionDays) {
  // Frozen from the NumPy reference at h = 0.1.
  const auto results = run_matrix(presets::treatment(ModelKind::TwoControl, false, 600.0),
                                  presets::two_control_levels());
  EXPECT_NEAR(results[1].metrics.suppression_days, 0.6, 0.15);
  EXPECT_NEAR(results[2].metrics.suppression_days, 240.0, 1.0);
  EXPECT_NEAR(results[3].metrics.suppression_days, 367.0, 1.0);
}

TEST(RunMatrix, BlowupReportsLevelIndex) {
  ScenarioConfig base;
  base.params.beta = 50.0;
  base.mesh = {0.0, 50.0, 1.0};
  base.schedule = EfficacySchedule({{10.0, 20.0, {}}});
  const std::vector<Efficacy> levels{{0.9, 0.9}, {0.0, 0.0}};
  try {
    run_matrix(base, levels);
    FAIL() << "expected IntegrationBlowup";
  } catch (const IntegrationBlowup& e) {
    ASSERT_TRUE(e.level());
    EXPECT_EQ(*e.level(), 0u);
  }
  EXPECT_THROW(run_matrix(base, {}), PreconditionError);
}

TEST(Metrics, RecomputedFromTrajectory) {
  ScenarioConfig c = presets::treatment(ModelKind::Combined, false, 600.0);
  c.schedule = c.schedule.with_efficacy({0.0, 0.6});
  const auto r = run(c);
  const auto& tr = r.trajectory;
  double peak = -1, peak_day = 0, trough = 1e300, trough_day = 0, suppressed = 0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const double t = tr.times[j], v = tr.states[j][2];
    if (v > peak) peak = v, peak_day = t;
    if (t >= 150.0 - 1e-9 && t < 400.0 - 1e-9 && v < trough) trough = v, trough_day = t;
    if (j + 1 < tr.size() && v < 50.0) suppressed += tr.times[j + 1] - t;
  }
  EXPECT_EQ(r.metrics.peak_viral_load.value, peak);
  EXPECT_EQ(r.metrics.peak_viral_load.day, peak_day);
  EXPECT_EQ(r.metrics.min_viral_load_during_treatment->value, trough);
  EXPECT_EQ(r.metrics.min_viral_load_during_treatment->day, trough_day);
  EXPECT_NEAR(r.metrics.suppression_days, suppressed, 1e-9);
  const double v_end = v_at(tr, 400.0);
  ASSERT_TRUE(r.metrics.rebound_day);
  EXPECT_GE(v_at(tr, *r.metrics.rebound_day), 2 * v_end);
  for (std::size_t j = 4001; j < tr.size() && tr.times[j] < *r.metrics.rebound_day - 1e-9; ++j) {
    EXPECT_LT(tr.states[j][2], 2 * v_end);
  }
}

TEST(Metrics, EmptyTrajectoryIsRejected) {
  EXPECT_THROW(compute_metrics(HivTrajectory{}, EfficacySchedule{}), PreconditionError);
}

TEST(ScenarioProperty, StepHalvingAgreesAtCommonMeshPoints) {
  auto rng = seeded(30);
  for (int trial = 0; trial < 6; ++trial) {
    ScenarioConfig c = presets::treatment(static_cast<ModelKind>(1 + trial % 2), false, 500.0);
    const double u = uniform(rng, 0.0, 0.7);
    c.schedule = c.schedule.with_efficacy({u, u});
    ScenarioConfig fine = c;
    fine.mesh.h = 0.05;
    const auto coarse_r = run(c), fine_r = run(fine);
    for (std::size_t j = 0; j < coarse_r.trajectory.size(); ++j) {
      for (std::size_t i = 0; i < 3; ++i) {
        const double a = coarse_r.trajectory.states[j][i];
        const double b = fine_r.trajectory.states[2 * j][i];
        EXPECT_LE(std::abs(a - b), 1e-3 * std::abs(b) + 1e-6) << "trial " << trial << " j " << j;
      }
    }
  }
}

TEST(ScenarioProperty, UntreatedRunsForgetTheirInitialCondition) {
  const auto eq = equilibria(ModelParams{}, {}, ModelKind::Basic).back().point;
  for (const auto& c : presets::basic_convergence(1000.0)) {
    const auto fin = run(c).metrics.final_state;
    EXPECT_NEAR(fin.T, eq.T, 0.01 * eq.T) << c.label;
    EXPECT_NEAR(fin.T_star, eq.T_star, 0.01 * eq.T_star) << c.label;
    EXPECT_NEAR(fin.V, eq.V, 0.01 * eq.V) << c.label;
  }
}

TEST(ScenarioProperty, RandomSchedulesStayNonNegativeAndFinite) {
  auto rng = seeded(31);
  for (int trial = 0; trial < 20; ++trial) {
    ScenarioConfig c;
    c.kind = static_cast<ModelKind>(trial % 3);
    c.initial = testing::random_state(rng);
    if (c.kind != ModelKind::Basic) {
      const double a = std::round(uniform(rng, 0, 200) * 10) / 10;
      const double b = std::round(uniform(rng, a + 1, 400) * 10) / 10;
      c.schedule = EfficacySchedule({{a, b, {uniform(rng, 0, 1), uniform(rng, 0, 1)}}});
    }
    const auto r = run(c);
    EXPECT_TRUE(r.warnings.empty()) << trial;
    for (const auto& s : r.trajectory.states) {
      for (double x : s) ASSERT_TRUE(std::isfinite(x));
    }
  }
}

TEST(CompareLinearization, ZeroPerturbationStaysAtEquilibrium) {
  ScenarioConfig c;
  c.mesh = {0.0, 50.0, 0.1};
  const auto cmp = compare_linearization(c, {0.0, 0.0, 0.0});
  EXPECT_LT(cmp.max_norm_discrepancy, 1e-9);
  EXPECT_EQ(cmp.perturbation_norm, 0.0);
}

TEST(CompareLinearization, DefaultPerturbationWithinFivePercent) {
  ScenarioConfig c;
  c.mesh = {0.0, 50.0, 0.1};
  const auto cmp = compare_linearization(c, {1.0, 0.1, 5.0});
  EXPECT_EQ(cmp.equilibrium.kind, EquilibriumKind::Infected);
  EXPECT_EQ(cmp.linearized.size(), cmp.nonlinear.size());
  EXPECT_LE(cmp.max_norm_discrepancy, 0.05 * cmp.perturbation_norm);
}

TEST(CompareLinearization, DiscrepancyIsSecondOrder) {
  ScenarioConfig c;
  c.mesh = {0.0, 50.0, 0.1};
  const auto big = compare_linearization(c, {1.0, 0.1, 5.0});
  const auto small = compare_linearization(c, {0.1, 0.01, 0.5});
  EXPECT_LT(small.max_norm_discrepancy / small.perturbation_norm,
            0.2 * big.max_norm_discrepancy / big.perturbation_norm);
}

TEST(CompareLinearization, Preconditions) {
  ScenarioConfig c;
  EXPECT_THROW(compare_linearization(c, {11.0, 0.0, 0.0}), PreconditionError);
  c.kind = ModelKind::Combined;
  EXPECT_THROW(compare_linearization(c, {1.0, 0.0, 0.0}), PreconditionError);
  c = ScenarioConfig{};
  c.params.k = 1.0;  // below threshold: no infected equilibrium
  EXPECT_THROW(compare_linearization(c, {1.0, 0.0, 0.0}), PreconditionError);
}

TEST(Presets, Shapes) {
  EXPECT_EQ(presets::initial_conditions().size(), 4u);
  const auto c = presets::treatment(ModelKind::Combined, true, 1000.0);
  ASSERT_EQ(c.schedule.segments().size(), 1u);
  EXPECT_EQ(c.schedule.segments()[0].start, 150.0);
  EXPECT_EQ(c.schedule.segments()[0].end, 1000.0);
  for (const auto& e : presets::combined_levels()) EXPECT_EQ(e.u1, 0.0);
  for (const auto& e : presets::two_control_levels()) EXPECT_EQ(e.u1, e.u2);
}

}  // namespace
}  // namespace viradyn
