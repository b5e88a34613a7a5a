#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "viradyn/cli/cli.hpp"

namespace viradyn::cli {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "': " + std::strerror(errno));
}

std::string g6(double v) { return format_number(v, kReportDigits); }

std::string complex_text(Complex z) {
  std::string text = g6(z.real());
  if (z.imag() != 0.0) {
    text += z.imag() < 0.0 ? "-" : "+";
    text += g6(std::abs(z.imag())) + "i";
  }
  return text;
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_number(*v, kCsvDigits) : std::string("none");
}

}  // namespace

void write_trajectory_csv(const HivTrajectory& trajectory, std::ostream& out) {
  out << kTrajectoryHeader << '\n';
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const auto& w = trajectory.states[j];
    out << format_number(trajectory.times[j], kCsvDigits) << ',' << format_number(w[0], kCsvDigits)
        << ',' << format_number(w[1], kCsvDigits) << ',' << format_number(w[2], kCsvDigits)
        << '\n';
  }
}

HivTrajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw ConfigError("trajectory CSV must start with header '" + std::string(kTrajectoryHeader) +
                      "'");
  }
  HivTrajectory traj;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::array<double, 4> v{};
    std::string cell;
    std::size_t n = 0;
    while (std::getline(fields, cell, ',')) {
      if (n == 4) break;
      try {
        std::size_t used = 0;
        v[n] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("trajectory CSV row " + std::to_string(row) + ": bad value '" + cell +
                          "'");
      }
      ++n;
    }
    if (n != 4) {
      throw ConfigError("trajectory CSV row " + std::to_string(row) + ": expected 4 columns");
    }
    traj.times.push_back(v[0]);
    traj.states.push_back({v[1], v[2], v[3]});
  }
  return traj;
}

std::string render_metrics(const MetricSet& m, std::string_view label,
                           std::size_t negative_excursions) {
  const auto g9 = [](double v) { return format_number(v, kCsvDigits); };
  std::ostringstream os;
  if (!label.empty()) os << "label=" << label << '\n';
  os << "final_T=" << g9(m.final_state.T) << '\n'
     << "final_Tstar=" << g9(m.final_state.T_star) << '\n'
     << "final_V=" << g9(m.final_state.V) << '\n'
     << "peak_viral_load=" << g9(m.peak_viral_load.value) << '\n'
     << "peak_viral_load_day=" << g9(m.peak_viral_load.day) << '\n';
  const auto& min_v = m.min_viral_load_during_treatment;
  os << "min_viral_load_during_treatment="
     << optional_text(min_v ? std::optional<double>(min_v->value) : std::nullopt) << '\n'
     << "min_viral_load_during_treatment_day="
     << optional_text(min_v ? std::optional<double>(min_v->day) : std::nullopt) << '\n'
     << "suppression_days=" << g9(m.suppression_days) << '\n'
     << "rebound_day=" << optional_text(m.rebound_day) << '\n'
     << "negative_excursions=" << negative_excursions << '\n';
  return os.str();
}

std::filesystem::path metrics_path_for(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".metrics.txt");
  return p;
}

void emit_trajectory(const ScenarioResult& result, const std::filesystem::path& path,
                     std::string_view label) {
  {
    auto out = open_for_write(path);
    write_trajectory_csv(result.trajectory, out);
    finish(out, path);
  }
  const auto mpath = metrics_path_for(path);
  auto out = open_for_write(mpath);
  out << render_metrics(result.metrics, label, result.warnings.size());
  finish(out, mpath);
}

Efficacy analysis_efficacy(const ScenarioConfig& scenario) {
  const auto segments = scenario.schedule.segments();
  if (segments.empty()) return {};
  Efficacy e = segments.front().efficacy;
  if (scenario.kind == ModelKind::Combined) e.u1 = 0.0;
  return e;
}

std::string render_analysis(const ModelParams& params, ModelKind kind, Efficacy efficacy,
                            const AnalysisOptions& options) {
  std::ostringstream os;
  os << "viradyn analysis\n"
     << "model=" << to_string(kind) << '\n'
     << "params=s=" << g6(params.s) << " d=" << g6(params.d) << " beta=" << g6(params.beta)
     << " k=" << g6(params.k) << " m1=" << g6(params.m1) << " m2=" << g6(params.m2) << '\n'
     << "efficacy=u1=" << g6(efficacy.u1) << " u2=" << g6(efficacy.u2) << '\n'
     << "jacobian_rounding="
     << (options.jacobian_decimals ? std::to_string(*options.jacobian_decimals) + " decimals"
                                   : std::string("none"))
     << '\n';

  const auto points = equilibria(params, efficacy, kind);
  os << "equilibria=" << points.size() << '\n';

  for (std::size_t n = 0; n < points.size(); ++n) {
    const Equilibrium& eq = points[n];
    os << "\n[equilibrium " << n + 1 << "]\n"
       << "kind=" << to_string(eq.kind) << '\n'
       << "point=" << g6(eq.point.T) << ", " << g6(eq.point.T_star) << ", " << g6(eq.point.V)
       << '\n';

    Matrix3 j = jacobian(params, efficacy, kind, eq.point);
    if (options.jacobian_decimals) j = round_entries(j, *options.jacobian_decimals);
    os << "jacobian=\n";
    for (std::size_t r = 0; r < 3; ++r) {
      os << "  " << g6(j(r, 0)) << ", " << g6(j(r, 1)) << ", " << g6(j(r, 2)) << '\n';
    }

    try {
      const EigenDecomposition eig = eigen3(j);
      os << "eigenvalues=\n";
      for (std::size_t i = 0; i < 3; ++i) {
        os << "  lambda" << i + 1 << "=" << complex_text(eig.values[i]) << '\n';
      }
      os << "eigenvectors=\n";
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& v = eig.vectors[i];
        os << "  V" << i + 1 << "=[" << complex_text(v[0]) << ", " << complex_text(v[1]) << ", "
           << complex_text(v[2]) << "]\n";
      }
      const StabilityReport report = classify(eig);
      os << "classification=" << to_string(report.classification) << '\n'
         << "hyperbolic=" << (report.hyperbolic ? "true" : "false") << '\n'
         << "spectral_abscissa=" << g6(report.spectral_abscissa) << '\n';
    } catch (const DefectiveMatrixError& e) {
      os << "eigen_error=" << e.what() << '\n';
    }
  }
  return os.str();
}

void emit_analysis(const ModelParams& params, ModelKind kind, Efficacy efficacy,
                   const std::filesystem::path& path, const AnalysisOptions& options) {
  const std::string text = render_analysis(params, kind, efficacy, options);
  auto out = open_for_write(path);
  out << text;
  finish(out, path);
}

std::string render_linearization_summary(const LinearizationComparison& c) {
  const auto g9 = [](double v) { return format_number(v, kCsvDigits); };
  std::ostringstream os;
  os << "equilibrium=" << g9(c.equilibrium.point.T) << "," << g9(c.equilibrium.point.T_star)
     << "," << g9(c.equilibrium.point.V) << '\n'
     << "perturbation=" << g9(c.perturbation[0]) << "," << g9(c.perturbation[1]) << ","
     << g9(c.perturbation[2]) << '\n'
     << "perturbation_norm=" << g9(c.perturbation_norm) << '\n'
     << "max_abs_discrepancy_T=" << g9(c.max_abs_discrepancy[0]) << '\n'
     << "max_abs_discrepancy_Tstar=" << g9(c.max_abs_discrepancy[1]) << '\n'
     << "max_abs_discrepancy_V=" << g9(c.max_abs_discrepancy[2]) << '\n'
     << "max_norm_discrepancy=" << g9(c.max_norm_discrepancy) << '\n'
     << "relative_discrepancy="
     << g9(c.perturbation_norm > 0 ? c.max_norm_discrepancy / c.perturbation_norm : 0.0) << '\n';
  return os.str();
}

void write_linearization_csv(const LinearizationComparison& c, std::ostream& out) {
  const auto g9 = [](double v) { return format_number(v, kCsvDigits); };
  const StateVector eq = c.equilibrium.point.to_vector();
  out << "t,dT_nonlinear,dTstar_nonlinear,dV_nonlinear,dT_linear,dTstar_linear,dV_linear\n";
  for (std::size_t j = 0; j < c.nonlinear.size(); ++j) {
    const auto& w = c.nonlinear.states[j];
    const auto& l = c.linearized[j];
    out << g9(c.nonlinear.times[j]) << ',' << g9(w[0] - eq[0]) << ',' << g9(w[1] - eq[1]) << ','
        << g9(w[2] - eq[2]) << ',' << g9(l[0]) << ',' << g9(l[1]) << ',' << g9(l[2]) << '\n';
  }
}

}  // namespace viradyn::cli
