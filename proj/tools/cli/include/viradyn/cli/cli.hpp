#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viradyn/analysis.hpp"
#include "viradyn/errors.hpp"
#include "viradyn/scenario.hpp"

namespace viradyn::cli {

/// Bad flags or flag values. The message names the offending flag.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class Command { Simulate, Analyze, Linearize, Reproduce };
std::string_view to_string(Command command);

struct CliConfig {
  Command command = Command::Simulate;
  std::optional<std::string> config_path;
  ScenarioConfig scenario;
  std::optional<std::string> out;
  Vector3 perturbation{1.0, 0.1, 5.0};   ///< linearize only
  std::optional<int> jacobian_decimals;  ///< analyze only
  bool help = false;

  bool operator==(const CliConfig&) const = default;
};

/// Parses `viradyn` arguments, without the program name.
///
///   command: simulate | analyze | linearize | reproduce
///   --config PATH        JSON scenario; flags given alongside override it
///   --model NAME         basic | two-control | combined
///   --param key=value    s, d, beta, k, m1, m2 (repeatable)
///   --t0 --t1 --h        mesh
///   --init T,Tstar,V     initial state
///   --treat a:b:u1[:u2]  treatment window [a, b) (repeatable). A single value
///                        binds to u2 for combined and to both u1 and u2 otherwise.
///   --label TEXT  --out PATH  --perturb dT,dTstar,dV  --jacobian-decimals N
CliConfig parse_args(std::span<const std::string> args);

/// Flag rendering such that parse_args(to_args(c)) == c for configs without a
/// config file.
std::vector<std::string> to_args(const CliConfig& config);

std::string usage();

/// JSON mirror of ScenarioConfig (kind, params, mesh, initial, schedule, label).
/// Missing keys keep the values already in `base`.
ScenarioConfig scenario_from_json(std::string_view json_text, ScenarioConfig base = {});
std::string scenario_to_json(const ScenarioConfig& config);

/// printf("%.*g") rendering.
std::string format_number(double value, int significant_digits);

inline constexpr int kCsvDigits = 9;
inline constexpr int kReportDigits = 6;
inline constexpr std::string_view kTrajectoryHeader = "t,T,Tstar,V";

void write_trajectory_csv(const HivTrajectory& trajectory, std::ostream& out);
HivTrajectory read_trajectory_csv(std::istream& in);

std::string render_metrics(const MetricSet& metrics, std::string_view label = {},
                           std::size_t negative_excursions = 0);

/// "dir/run.csv" -> "dir/run.metrics.txt".
std::filesystem::path metrics_path_for(const std::filesystem::path& csv_path);

/// Writes the CSV to `path` and the key=value metrics next to it.
void emit_trajectory(const ScenarioResult& result, const std::filesystem::path& path,
                     std::string_view label = {});

struct AnalysisOptions {
  /// Round Jacobian entries to this many decimals before the eigen-decomposition.
  std::optional<int> jacobian_decimals;
};

std::string render_analysis(const ModelParams& params, ModelKind kind, Efficacy efficacy,
                            const AnalysisOptions& options = {});
void emit_analysis(const ModelParams& params, ModelKind kind, Efficacy efficacy,
                   const std::filesystem::path& path, const AnalysisOptions& options = {});

std::string render_linearization_summary(const LinearizationComparison& comparison);
void write_linearization_csv(const LinearizationComparison& comparison, std::ostream& out);

/// Efficacy analyzed by `analyze`: the first treatment window's, else none.
Efficacy analysis_efficacy(const ScenarioConfig& scenario);

/// Runs a parsed command. Returns the process exit code:
/// 0 success, 1 I/O failure, 2 usage or configuration error, 3 numerical failure.
int execute(const CliConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + execute with error reporting.
int main_entry(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace viradyn::cli
