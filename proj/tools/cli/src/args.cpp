#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "viradyn/cli/cli.hpp"

namespace viradyn::cli {
namespace {

using nlohmann::json;

double parse_number(std::string_view flag, std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw UsageError(std::string(flag) + ": malformed number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = text.find(sep, begin);
    parts.push_back(text.substr(begin, pos - begin));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return parts;
}

Vector3 parse_triple(std::string_view flag, std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) {
    throw UsageError(std::string(flag) + ": expected three comma-separated numbers, got '" +
                     std::string(text) + "'");
  }
  return {parse_number(flag, parts[0]), parse_number(flag, parts[1]),
          parse_number(flag, parts[2])};
}

void apply_param(ModelParams& params, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw UsageError("--param: expected key=value, got '" + std::string(assignment) + "'");
  }
  const std::string_view key = assignment.substr(0, eq);
  const double value = parse_number("--param " + std::string(key), assignment.substr(eq + 1));
  if (key == "s") {
    params.s = value;
  } else if (key == "d") {
    params.d = value;
  } else if (key == "beta") {
    params.beta = value;
  } else if (key == "k") {
    params.k = value;
  } else if (key == "m1") {
    params.m1 = value;
  } else if (key == "m2") {
    params.m2 = value;
  } else {
    throw UsageError("--param: unknown parameter '" + std::string(key) +
                     "' (expected s, d, beta, k, m1, m2)");
  }
}

ScheduleSegment parse_treat(std::string_view text, ModelKind kind) {
  const auto parts = split(text, ':');
  if (parts.size() != 3 && parts.size() != 4) {
    throw UsageError("--treat: expected start:end:u1[:u2], got '" + std::string(text) + "'");
  }
  ScheduleSegment seg;
  seg.start = parse_number("--treat", parts[0]);
  seg.end = parse_number("--treat", parts[1]);
  const double first = parse_number("--treat", parts[2]);
  if (kind == ModelKind::Combined) {
    if (parts.size() == 4) {
      throw UsageError("--treat: the combined model takes a single efficacy, got '" +
                       std::string(text) + "'");
    }
    seg.efficacy = {0.0, first};
  } else if (parts.size() == 4) {
    seg.efficacy = {first, parse_number("--treat", parts[3])};
  } else {
    seg.efficacy = {first, first};
  }
  return seg;
}

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "analyze") return Command::Analyze;
  if (name == "linearize") return Command::Linearize;
  if (name == "reproduce") return Command::Reproduce;
  throw UsageError("unknown command '" + name +
                   "' (expected simulate, analyze, linearize or reproduce)");
}

// The combined model carries its single control in u2 only.
EfficacySchedule without_rti(const EfficacySchedule& schedule) {
  std::vector<ScheduleSegment> segments(schedule.segments().begin(), schedule.segments().end());
  for (auto& s : segments) s.efficacy.u1 = 0.0;
  return EfficacySchedule(std::move(segments));
}

std::string render_exact(double value) { return format_number(value, 17); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading config file '" + path + "'");
  return ss.str();
}

template <class T>
void read_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Analyze: return "analyze";
    case Command::Linearize: return "linearize";
    case Command::Reproduce: return "reproduce";
  }
  return "unknown";
}

std::string format_number(double value, int significant_digits) {
  if (value == 0.0) value = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
  return buf;
}

ScenarioConfig scenario_from_json(std::string_view json_text, ScenarioConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");

  try {
    if (doc.contains("kind")) base.kind = parse_model_kind(doc.at("kind").get<std::string>());
    read_if(doc, "label", base.label);
    if (doc.contains("params")) {
      const json& p = doc.at("params");
      read_if(p, "s", base.params.s);
      read_if(p, "d", base.params.d);
      read_if(p, "beta", base.params.beta);
      read_if(p, "k", base.params.k);
      read_if(p, "m1", base.params.m1);
      read_if(p, "m2", base.params.m2);
    }
    if (doc.contains("mesh")) {
      const json& m = doc.at("mesh");
      read_if(m, "a", base.mesh.a);
      read_if(m, "b", base.mesh.b);
      read_if(m, "h", base.mesh.h);
    }
    if (doc.contains("initial")) {
      const json& x = doc.at("initial");
      read_if(x, "T", base.initial.T);
      read_if(x, "T_star", base.initial.T_star);
      read_if(x, "V", base.initial.V);
    }
    if (doc.contains("schedule")) {
      std::vector<ScheduleSegment> segments;
      for (const json& s : doc.at("schedule")) {
        ScheduleSegment seg;
        seg.start = s.at("t_start").get<double>();
        seg.end = s.at("t_end").get<double>();
        read_if(s, "u1", seg.efficacy.u1);
        read_if(s, "u2", seg.efficacy.u2);
        if (base.kind == ModelKind::Combined) seg.efficacy.u1 = 0.0;
        segments.push_back(seg);
      }
      base.schedule = EfficacySchedule(std::move(segments));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return base;
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["kind"] = std::string(to_string(c.kind));
  doc["label"] = c.label;
  doc["params"] = {{"s", c.params.s},   {"d", c.params.d},   {"beta", c.params.beta},
                   {"k", c.params.k},   {"m1", c.params.m1}, {"m2", c.params.m2}};
  doc["mesh"] = {{"a", c.mesh.a}, {"b", c.mesh.b}, {"h", c.mesh.h}};
  doc["initial"] = {{"T", c.initial.T}, {"T_star", c.initial.T_star}, {"V", c.initial.V}};
  doc["schedule"] = json::array();
  for (const auto& seg : c.schedule.segments()) {
    doc["schedule"].push_back({{"t_start", seg.start},
                               {"t_end", seg.end},
                               {"u1", seg.efficacy.u1},
                               {"u2", seg.efficacy.u2}});
  }
  return doc.dump(2) + "\n";
}

std::string usage() {
  return "usage: viradyn simulate|analyze|linearize|reproduce [flags]\n"
         "  --config PATH           JSON scenario file (flags override it)\n"
         "  --model NAME            basic | two-control | combined (default basic)\n"
         "  --param key=value       override s, d, beta, k, m1 or m2 (repeatable)\n"
         "  --t0 DAYS --t1 DAYS     simulation window (default 0, 400)\n"
         "  --h DAYS                RK4 step (default 0.1)\n"
         "  --init T,Tstar,V        initial state (default 1200,0,100)\n"
         "  --treat a:b:u1[:u2]     treatment on [a, b) (repeatable)\n"
         "  --label TEXT            scenario label\n"
         "  --out PATH              output file (directory for reproduce)\n"
         "  --perturb dT,dTstar,dV  linearize: perturbation (default 1,0.1,5)\n"
         "  --jacobian-decimals N   analyze: round the Jacobian before eigen-decomposition\n";
}

CliConfig parse_args(std::span<const std::string> args) {
  CLI::App app{"within-host HIV dynamics toolkit", "viradyn"};
  app.set_help_flag("--help");

  std::string command, config_path, model, t0, t1, h, init, out, label, perturb, decimals;
  std::vector<std::string> params, treats;

  app.add_option("command", command)->required();
  auto* o_config = app.add_option("--config", config_path);
  auto* o_model = app.add_option("--model", model);
  app.add_option("--param", params)->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* o_t0 = app.add_option("--t0", t0);
  auto* o_t1 = app.add_option("--t1", t1);
  auto* o_h = app.add_option("--h", h);
  auto* o_init = app.add_option("--init", init);
  auto* o_treat = app.add_option("--treat", treats)->expected(1)->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  auto* o_out = app.add_option("--out", out);
  auto* o_label = app.add_option("--label", label);
  auto* o_perturb = app.add_option("--perturb", perturb);
  auto* o_decimals = app.add_option("--jacobian-decimals", decimals);

  CliConfig cfg;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    cfg.help = true;
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  cfg.command = parse_command(command);

  ScenarioConfig& sc = cfg.scenario;
  if (o_config->count() > 0) {
    cfg.config_path = config_path;
    sc = scenario_from_json(read_file(config_path), sc);
  }
  if (o_model->count() > 0) {
    try {
      sc.kind = parse_model_kind(model);
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--model: ") + e.what());
    }
  }
  for (const auto& p : params) apply_param(sc.params, p);
  if (o_t0->count() > 0) sc.mesh.a = parse_number("--t0", t0);
  if (o_t1->count() > 0) sc.mesh.b = parse_number("--t1", t1);
  if (o_h->count() > 0) sc.mesh.h = parse_number("--h", h);
  if (o_init->count() > 0) sc.initial = SystemState::from_vector(parse_triple("--init", init));
  if (o_label->count() > 0) sc.label = label;
  if (o_out->count() > 0) cfg.out = out;
  if (o_perturb->count() > 0) cfg.perturbation = parse_triple("--perturb", perturb);
  if (o_decimals->count() > 0) {
    const double d = parse_number("--jacobian-decimals", decimals);
    if (d != std::floor(d) || d < 0 || d > 15) {
      throw UsageError("--jacobian-decimals: expected an integer in [0, 15], got '" + decimals +
                       "'");
    }
    cfg.jacobian_decimals = static_cast<int>(d);
  }

  if (o_treat->count() > 0) {
    std::vector<ScheduleSegment> segments;
    for (const auto& t : treats) segments.push_back(parse_treat(t, sc.kind));
    try {
      sc.schedule = EfficacySchedule(std::move(segments));
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--treat: ") + e.what());
    }
  } else if (sc.kind == ModelKind::Combined) {
    sc.schedule = without_rti(sc.schedule);
  }

  try {
    sc.params.validate();
  } catch (const ConfigError& e) {
    throw UsageError(std::string("--param: ") + e.what());
  }
  try {
    sc.mesh.validate();
  } catch (const ConfigError& e) {
    throw UsageError(std::string("--t0/--t1/--h: ") + e.what());
  }
  try {
    sc.validate();
  } catch (const NumericalError& e) {
    throw UsageError(std::string("--init: ") + e.what());
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    throw UsageError((what.rfind("initial", 0) == 0 ? "--init: " : "--treat: ") + what);
  }
  return cfg;
}

std::vector<std::string> to_args(const CliConfig& c) {
  std::vector<std::string> args{std::string(to_string(c.command))};
  auto flag = [&args](std::string name, std::string value) {
    args.push_back(std::move(name));
    args.push_back(std::move(value));
  };
  if (c.config_path) flag("--config", *c.config_path);
  const ScenarioConfig& s = c.scenario;
  flag("--model", std::string(to_string(s.kind)));
  flag("--param", "s=" + render_exact(s.params.s));
  flag("--param", "d=" + render_exact(s.params.d));
  flag("--param", "beta=" + render_exact(s.params.beta));
  flag("--param", "k=" + render_exact(s.params.k));
  flag("--param", "m1=" + render_exact(s.params.m1));
  flag("--param", "m2=" + render_exact(s.params.m2));
  flag("--t0", render_exact(s.mesh.a));
  flag("--t1", render_exact(s.mesh.b));
  flag("--h", render_exact(s.mesh.h));
  flag("--init", render_exact(s.initial.T) + "," + render_exact(s.initial.T_star) + "," +
                     render_exact(s.initial.V));
  for (const auto& seg : s.schedule.segments()) {
    std::string spec = render_exact(seg.start) + ":" + render_exact(seg.end) + ":";
    if (s.kind == ModelKind::Combined) {
      spec += render_exact(seg.efficacy.u2);
    } else {
      spec += render_exact(seg.efficacy.u1) + ":" + render_exact(seg.efficacy.u2);
    }
    flag("--treat", spec);
  }
  flag("--label", s.label);
  if (c.out) flag("--out", *c.out);
  flag("--perturb", render_exact(c.perturbation[0]) + "," + render_exact(c.perturbation[1]) +
                        "," + render_exact(c.perturbation[2]));
  if (c.jacobian_decimals) flag("--jacobian-decimals", std::to_string(*c.jacobian_decimals));
  return args;
}

}  // namespace viradyn::cli
