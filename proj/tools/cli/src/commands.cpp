#include <fstream>
#include <ostream>

#include "viradyn/cli/cli.hpp"

namespace viradyn::cli {
namespace {

constexpr std::string_view kComponentNames[] = {"T", "Tstar", "V"};

void report_warnings(const ScenarioResult& result, std::string_view label, std::ostream& err) {
  for (const auto& w : result.warnings) {
    err << "warning: " << label << ": " << kComponentNames[w.component] << " falls to "
        << format_number(w.min_value, kCsvDigits) << " at t=" << format_number(w.min_time, 9)
        << " (first below -1e-06 at step " << w.first_index << ")\n";
  }
}

int simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const ScenarioResult result = run(cfg.scenario);
  const std::filesystem::path path = cfg.out.value_or("trajectory.csv");
  emit_trajectory(result, path, cfg.scenario.label);
  report_warnings(result, cfg.scenario.label, err);
  out << "wrote " << path.string() << " (" << result.trajectory.size() << " points) and "
      << metrics_path_for(path).string() << '\n';
  return 0;
}

int analyze(const CliConfig& cfg, std::ostream& out) {
  const AnalysisOptions options{cfg.jacobian_decimals};
  const Efficacy efficacy = analysis_efficacy(cfg.scenario);
  if (cfg.out) {
    emit_analysis(cfg.scenario.params, cfg.scenario.kind, efficacy, *cfg.out, options);
    out << "wrote " << *cfg.out << '\n';
  } else {
    out << render_analysis(cfg.scenario.params, cfg.scenario.kind, efficacy, options);
  }
  return 0;
}

int linearize(const CliConfig& cfg, std::ostream& out) {
  const LinearizationComparison cmp = compare_linearization(cfg.scenario, cfg.perturbation);
  const std::string summary = render_linearization_summary(cmp);
  if (!cfg.out) {
    out << summary;
    return 0;
  }
  const std::filesystem::path path = *cfg.out;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw IoError("cannot open '" + path.string() + "' for writing");
  write_linearization_csv(cmp, csv);
  std::ofstream meta(metrics_path_for(path), std::ios::binary);
  if (!meta) throw IoError("cannot open '" + metrics_path_for(path).string() + "' for writing");
  meta << summary;
  if (!csv || !meta) throw IoError("failed writing linearization output next to " + path.string());
  out << "wrote " << path.string() << " and " << metrics_path_for(path).string() << '\n';
  return 0;
}

struct SummaryRow {
  std::string label;
  ModelKind kind;
  Efficacy efficacy;
  MetricSet metrics;
};

void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto g9 = [](double v) { return format_number(v, kCsvDigits); };
  os << "label,model,u1,u2,final_T,final_Tstar,final_V,peak_viral_load,peak_viral_load_day,"
        "min_viral_load_during_treatment,min_viral_load_during_treatment_day,suppression_days,"
        "rebound_day\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << r.label << ',' << to_string(r.kind) << ',' << g9(r.efficacy.u1) << ','
       << g9(r.efficacy.u2) << ',' << g9(m.final_state.T) << ',' << g9(m.final_state.T_star)
       << ',' << g9(m.final_state.V) << ',' << g9(m.peak_viral_load.value) << ','
       << g9(m.peak_viral_load.day) << ','
       << (m.min_viral_load_during_treatment ? g9(m.min_viral_load_during_treatment->value)
                                             : std::string("none"))
       << ','
       << (m.min_viral_load_during_treatment ? g9(m.min_viral_load_during_treatment->day)
                                             : std::string("none"))
       << ',' << g9(m.suppression_days) << ','
       << (m.rebound_day ? g9(*m.rebound_day) : std::string("none")) << '\n';
  }
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

int reproduce(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = cfg.out.value_or("reproduce");
  std::filesystem::create_directories(dir);
  const ModelParams& params = cfg.scenario.params;
  std::vector<SummaryRow> rows;

  auto record = [&](const ScenarioConfig& c, const ScenarioResult& r, Efficacy e) {
    emit_trajectory(r, dir / (c.label + ".csv"), c.label);
    report_warnings(r, c.label, err);
    rows.push_back({c.label, c.kind, e, r.metrics});
  };

  for (ScenarioConfig c : presets::basic_convergence()) {
    c.params = params;
    record(c, run(c), {});
  }

  struct Matrix {
    ModelKind kind;
    bool continuous;
    double horizon;
    std::vector<Efficacy> levels;
  };
  auto nonzero = [](std::vector<Efficacy> levels) {
    std::erase_if(levels, [](const Efficacy& e) { return e.u1 == 0.0 && e.u2 == 0.0; });
    return levels;
  };
  const std::vector<Matrix> matrices{
      {ModelKind::TwoControl, false, 600.0, presets::two_control_levels()},
      {ModelKind::Combined, false, 600.0, presets::combined_levels()},
      {ModelKind::TwoControl, true, 1000.0, nonzero(presets::two_control_levels())},
      {ModelKind::Combined, true, 1000.0, nonzero(presets::combined_levels())},
  };
  for (const auto& m : matrices) {
    ScenarioConfig base = presets::treatment(m.kind, m.continuous, m.horizon);
    base.params = params;
    const auto results = run_matrix(base, m.levels);
    for (std::size_t i = 0; i < results.size(); ++i) {
      ScenarioConfig c = base;
      const double u = m.kind == ModelKind::Combined ? m.levels[i].u2 : m.levels[i].u1;
      c.label = base.label + "_u" + format_number(u, 3);
      c.schedule = base.schedule.with_efficacy(m.levels[i]);
      record(c, results[i], m.levels[i]);
    }
  }

  write_summary(rows, dir / "summary.csv");
  emit_analysis(params, ModelKind::Basic, {}, dir / "analysis.txt");
  out << "wrote " << rows.size() << " scenarios, summary.csv and analysis.txt to " << dir.string()
      << '\n';
  return 0;
}

}  // namespace

int execute(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.help) {
    out << usage();
    return 0;
  }
  switch (cfg.command) {
    case Command::Simulate: return simulate(cfg, out, err);
    case Command::Analyze: return analyze(cfg, out);
    case Command::Linearize: return linearize(cfg, out);
    case Command::Reproduce: return reproduce(cfg, out, err);
  }
  return 2;
}

int main_entry(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  try {
    return execute(parse_args(args), out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << usage();
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace viradyn::cli
