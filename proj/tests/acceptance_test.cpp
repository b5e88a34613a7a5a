// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "viradyn/cli/cli.hpp"
#include "viradyn/scenario.hpp"

namespace {

using namespace viradyn;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) { return cli::format_number(v, 6); }

Equilibrium infected_equilibrium() {
  return equilibria(ModelParams{}, {}, ModelKind::Basic).back();
}

Outcome infected_equilibrium_check() {
  Outcome o;
  const auto eq = infected_equilibrium();
  o.require(eq.kind == EquilibriumKind::Infected, "infected equilibrium missing");
  o.require(std::abs(eq.point.T - 240.0) <= 1e-3, "T=" + num(eq.point.T));
  o.require(std::abs(eq.point.T_star - 21.6667) <= 1e-3, "T*=" + num(eq.point.T_star));
  o.require(std::abs(eq.point.V - 902.778) <= 1e-3, "V=" + num(eq.point.V));
  const auto report = cli::render_analysis(ModelParams{}, ModelKind::Basic, {});
  o.require(report.find("point=240, 21.6667, 902.778") != std::string::npos,
            "analyze report lacks the infected point");
  return o;
}

Outcome jacobian_check() {
  Outcome o;
  const auto eq = infected_equilibrium();
  const Matrix3 j = jacobian(ModelParams{}, {}, ModelKind::Basic, eq.point);
  const Matrix3 rounded = testing::rounded_jacobian();
  for (std::size_t i = 0; i < 9; ++i) {
    o.require(std::abs(j.entries[i] - rounded.entries[i]) <= 5e-5,
              "entry " + std::to_string(i) + "=" + num(j.entries[i]));
  }
  return o;
}

Outcome eigenvalue_check() {
  Outcome o;
  const auto eig = eigen3(testing::rounded_jacobian());
  const std::vector<Complex> expected{{-2.64334, 0.0}, {-0.0191783, 0.0658064},
                                      {-0.0191783, -0.0658064}};
  const double d = testing::multiset_distance(expected, {eig.values.begin(), eig.values.end()});
  o.require(d <= 1e-4, "multiset distance " + num(d));
  return o;
}

Outcome rk4_order_check() {
  Outcome o;
  using Scalar = Vector<1>;
  const auto decay = [](double, const Scalar& u) { return Scalar{-2.0 * u[0]}; };
  std::vector<double> errors;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto traj = integrate(decay, MeshSpec{0.0, 1.0, h}, Scalar{1.0});
    errors.push_back(std::abs(traj.states.back()[0] - std::exp(-2.0)));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    o.require(ratio >= 14.0 && ratio <= 18.0, "ratio " + num(ratio));
  }
  return o;
}

Outcome convergence_check() {
  Outcome o;
  const StateVector eq = infected_equilibrium().point.to_vector();
  std::vector<StateVector> ends;
  for (const auto& c : presets::basic_convergence(1000.0)) {
    ends.push_back(run(c).trajectory.states.back());
    for (std::size_t i = 0; i < 3; ++i) {
      o.require(std::abs(ends.back()[i] - eq[i]) <= 0.01 * std::abs(eq[i]),
                c.label + " component " + std::to_string(i) + "=" + num(ends.back()[i]));
    }
  }
  for (std::size_t a = 0; a < ends.size(); ++a) {
    for (std::size_t b = a + 1; b < ends.size(); ++b) {
      for (std::size_t i = 0; i < 3; ++i) {
        const double scale = std::max(std::abs(ends[a][i]), std::abs(ends[b][i]));
        o.require(std::abs(ends[a][i] - ends[b][i]) <= 0.01 * scale,
                  "endpoints " + std::to_string(a) + "," + std::to_string(b) + " disagree");
      }
    }
  }
  return o;
}

double v_at(const HivTrajectory& traj, const MeshSpec& mesh, double t) {
  return traj.states[mesh.index_of(t)][2];
}

Outcome treatment_check() {
  Outcome o;
  const auto levels = presets::combined_levels();
  const ScenarioConfig window = presets::treatment(ModelKind::Combined, false, 600.0);
  const auto results = run_matrix(window, levels);
  for (std::size_t i = 0; i + 1 < results.size(); ++i) {
    const double a = results[i].metrics.min_viral_load_during_treatment->value;
    const double b = results[i + 1].metrics.min_viral_load_during_treatment->value;
    o.require(b < a, "(a) trough not decreasing at u=" + num(levels[i + 1].u2));
  }
  const auto& rebound = results.back().metrics.rebound_day;
  o.require(rebound && *rebound > 400.0, "(b) no rebound after day 400 at u=0.7");

  for (ModelKind kind : {ModelKind::Combined, ModelKind::TwoControl}) {
    auto continuous_levels =
        kind == ModelKind::Combined ? presets::combined_levels() : presets::two_control_levels();
    std::erase_if(continuous_levels, [](const Efficacy& e) { return e.u1 == 0 && e.u2 == 0; });
    const ScenarioConfig continuous = presets::treatment(kind, true, 1000.0);
    const auto cont = run_matrix(continuous, continuous_levels);
    for (std::size_t i = 0; i < cont.size(); ++i) {
      const auto& tr = cont[i].trajectory;
      const double v150 = v_at(tr, continuous.mesh, 150.0);
      double worst = 0.0;
      for (std::size_t j = continuous.mesh.index_of(200.0) + 1; j < tr.size(); ++j) {
        worst = std::max(worst, tr.states[j][2]);
      }
      o.require(worst < v150, "(c) " + std::string(to_string(kind)) + " level " +
                                  std::to_string(i) + " max V " + num(worst) + " >= " + num(v150));
    }
  }
  return o;
}

Outcome linearization_check() {
  Outcome o;
  ScenarioConfig c;
  c.mesh = {0.0, 50.0, 0.1};
  const Vector3 x0{1.0, 0.1, 5.0};
  const auto cmp = compare_linearization(c, x0);
  o.require(cmp.max_norm_discrepancy <= 0.05 * cmp.perturbation_norm,
            "discrepancy " + num(cmp.max_norm_discrepancy));

  const auto eig = eigen3(jacobian(c.params, {}, ModelKind::Basic, cmp.equilibrium.point));
  const auto sol = fit_linearized(eig, x0);
  const double t = 10.0 / std::abs(classify(eig).spectral_abscissa);
  const double late = euclidean_norm(evaluate_linearized(sol, t));
  o.require(late < 1e-3 * euclidean_norm(x0), "norm at t=" + num(t) + " is " + num(late));
  return o;
}

Outcome reduction_check() {
  Outcome o;
  ScenarioConfig basic;
  ScenarioConfig two = basic;
  two.kind = ModelKind::TwoControl;
  o.require(run(basic).trajectory.states == run(two).trajectory.states,
            "TwoControl differs from Basic");

  auto rng = testing::seeded(80);
  const ModelParams p;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const SystemState x = testing::random_state(rng);
    const SystemState f = rhs(ModelKind::Basic, p, {}, x);
    const double lhs = f.T + f.T_star;
    const double expected = p.s - p.d * x.T - p.m2 * x.T_star;
    const double scale = std::abs(p.s) + std::abs(p.d * x.T) + std::abs(p.m2 * x.T_star) +
                         2 * std::abs(p.beta * x.T * x.V);
    worst = std::max(worst, std::abs(lhs - expected) / scale);
  }
  o.require(worst <= 8 * std::numeric_limits<double>::epsilon(),
            "coupling identity off by " + num(worst) + " relative");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"infected equilibrium", infected_equilibrium_check},
      {"jacobian regression", jacobian_check},
      {"eigenvalue regression", eigenvalue_check},
      {"rk4 fourth order", rk4_order_check},
      {"convergence from every initial condition", convergence_check},
      {"treatment suppression and rebound", treatment_check},
      {"linearization fidelity", linearization_check},
      {"reduction identities", reduction_check},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].check();
    } catch (const std::exception& e) {
      outcome.require(false, std::string("threw: ") + e.what());
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    failures += !outcome.pass;
    std::printf("%s criterion %zu: %s (%.1f ms)%s%s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, ms, outcome.pass ? "" : ": ", outcome.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
