#include "uavflow/cli.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "uavflow/errors.hpp"
#include "uavflow/mission.hpp"
#include "uavflow/scenario_io.hpp"

namespace uavflow {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string scenario;
  std::string out = "trace.csv";
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string dims;
  std::string topology;
  std::optional<int> iters;
  std::string sweep;
};

void add_run_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
  cmd->add_option("--out", opt.out, "Trace CSV path");
  cmd->add_option("--seed", opt.seed, "Override the scenario seed");
  cmd->add_option("--mode", opt.mode, "reckless-coop | reckless-noncoop | smart")
      ->check(CLI::IsMember({"reckless-coop", "reckless-noncoop", "smart"}));
  cmd->add_option("--dims", opt.dims, "xy | xz | yz | xyz")->check(CLI::IsMember({"xy", "xz", "yz", "xyz"}));
  cmd->add_option("--topology", opt.topology, "line | mesh")->check(CLI::IsMember({"line", "mesh"}));
  cmd->add_option("--iters", opt.iters, "Iteration cap")->check(CLI::PositiveNumber);
}

Scenario configured(const Options& opt, std::ostream& err) {
  Scenario s = load_scenario(opt.scenario);
  if (opt.seed) s = apply_override(s, "seed", std::to_string(*opt.seed));
  if (!opt.mode.empty()) s = apply_override(s, "mode", "\"" + opt.mode + "\"");
  if (!opt.dims.empty()) s = apply_override(s, "dims", "\"" + opt.dims + "\"");
  if (!opt.topology.empty()) s = apply_override(s, "topology", "\"" + opt.topology + "\"");
  if (opt.iters) s = apply_override(s, "iters", std::to_string(*opt.iters));
  if (!s.seed) throw SchemaError("seed", "a seed is required for runs (set it in the scenario or pass --seed)");
  if (s.mode == Mode::Smart) {
    err << "warning: smart mode ignores power.i_max_dbm and power.r_th_bps; relays transmit at full power\n";
  }
  return s;
}

std::string summary(const SimulationTrace& trace) {
  std::ostringstream line;
  line.precision(10);
  line << "final_flow_bps=" << trace.final_flow() << " iterations=" << trace.iterations()
       << " converged=" << (trace.converged ? 1 : 0);
  if (trace.failed()) line << " error=" << trace.error_family;
  return line.str();
}

std::string suffixed(const std::string& path, const std::string& field, const std::string& value) {
  std::string tag = field + "_" + value;
  for (char& c : tag) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + tag;
  return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

SweepSpec parse_sweep(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw SchemaError("--sweep", "expected FIELD=v1,v2,...");
  }
  SweepSpec spec;
  spec.field = text.substr(0, eq);
  std::stringstream values(text.substr(eq + 1));
  std::string v;
  while (std::getline(values, v, ',')) spec.values.push_back(v);
  return spec;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relay-network trajectory and power optimization"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
  CLI::App* run = app.add_subcommand("run", "Run one simulation and write its trace");
  add_run_flags(run, opt);
  CLI::App* sweep = app.add_subcommand("sweep", "Run one simulation per value of a field");
  add_run_flags(sweep, opt);
  sweep->add_option("--sweep", opt.sweep, "FIELD=v1,v2,...")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate) {
      const Scenario s = load_scenario(opt.scenario);
      out << "valid scenario, " << s.node_count() << " nodes, " << s.interferer_count() << " interferers\n";
      return kExitOk;
    }
    const Scenario s = configured(opt, err);
    if (*run) {
      const SimulationTrace trace = alternating_optimize(s);
      export_trace(trace, opt.out);
      out << summary(trace) << "\n";
      if (trace.failed()) err << "error: " << trace.error << "\n";
      return trace.failed() ? kExitFailed : kExitOk;
    }
    const SweepSpec spec = parse_sweep(opt.sweep);
    bool any_failed = false;
    for (const SweepPoint& point : run_sweep(s, spec)) {
      const std::string path = suffixed(opt.out, spec.field, point.value);
      export_trace(point.trace, path);
      out << spec.field << "=" << point.value << " " << summary(point.trace) << " trace=" << path << "\n";
      if (point.trace.failed()) {
        err << "error at " << spec.field << "=" << point.value << ": " << point.trace.error << "\n";
        any_failed = true;
      }
    }
    return any_failed ? kExitFailed : kExitOk;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace uavflow
