// Command-line front end: run, sweep, validate-config, dump-gp.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hapsris/hapsris.hpp"

namespace fs = std::filesystem;
using namespace hapsris;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("hapsris");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HRP_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

NetworkConfig load_config(const std::string& path) {
  if (path.empty()) return NetworkConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<Objective> parse_objectives(const std::string& s) {
  if (s == "all") return {Objective::sum_rate, Objective::max_min, Objective::min_ris, Objective::proportional};
  if (auto o = objective_from_string(s)) return {*o};
  throw UsageError("unknown objective '" + s + "' (sum-rate|max-min|min-ris|proportional|all)");
}

/// "A..B" inclusive.
std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw UsageError("--seeds expects A..B");
  try {
    const auto a = std::stoull(s.substr(0, dots));
    const auto b = std::stoull(s.substr(dots + 2));
    if (b < a) throw UsageError("--seeds: B must be >= A");
    std::vector<std::uint64_t> out;
    for (auto v = a; v <= b; ++v) out.push_back(v);
    return out;
  } catch (const std::logic_error&) {
    throw UsageError("--seeds expects A..B with integers");
  }
}

/// "lo:hi:step" (inclusive of hi) or a comma-separated list.
std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
      if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
        throw UsageError("--values lo:hi:step needs lo <= hi and step > 0");
      const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
      for (long i = 0; i < count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    } else {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw UsageError("cannot parse --values '" + s + "'");
  }
  if (out.empty()) throw UsageError("--values is empty");
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int exit_code_for(const Report& rep) {
  bool any = false, any_ok = false;
  for (const auto& r : rep.records)
    for (const auto& o : r.results) {
      if (o.status == "no_k2") continue;
      any = true;
      if (o.status != "infeasible") any_ok = true;
    }
  return (any && !any_ok) ? kExitInfeasible : kExitOk;
}

/// Written before any computation starts.
void write_manifest(const fs::path& out_dir, RunManifest& manifest) {
  fs::create_directories(out_dir);
  manifest.outputs = {"manifest.json", "report.csv", "report.json"};
  manifest.timestamp = utc_timestamp();
  write_file_atomic(out_dir / "manifest.json", manifest_json(manifest, true).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"HAPS-RIS beyond-cell network planner and resource allocator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_objective = "all";
  std::string sweep_objective = "sum-rate";
  std::string dump_objective;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out_dir = "out";
  std::string axis;
  std::string values;
  int jobs = 1;
  bool print_config = false;
  std::string dump_out;

  auto* run = app.add_subcommand("run", "run one or more seeds of a scenario");
  run->add_option("--config", config_path, "config file (JSON)");
  run->add_option("--seed", seed, "single seed (default: config seed)");
  run->add_option("--seeds", seeds, "seed range A..B");
  run->add_option("--objective", run_objective, "sum-rate|max-min|min-ris|proportional|all");
  run->add_option("--out", out_dir, "output directory");

  auto* sw = app.add_subcommand("sweep", "sweep one parameter over seeds");
  sw->add_option("--config", config_path, "config file (JSON)");
  sw->add_option("--axis", axis, "bs-count|carrier-freq|n-max|r-min|p-cs-max")->required();
  sw->add_option("--values", values, "lo:hi:step or v1,v2,... (default: built-in range for the axis)");
  sw->add_option("--seeds", seeds, "seed range A..B (default 1..20)");
  sw->add_option("--objective", sweep_objective, "sum-rate|max-min|min-ris|proportional|all");
  sw->add_option("--out", out_dir, "output directory");
  sw->add_option("--jobs", jobs, "parallel sweep cells")->check(CLI::PositiveNumber);

  auto* vc = app.add_subcommand("validate-config", "check a config file and print its canonical form");
  vc->add_option("--config", config_path, "config file (JSON)");
  vc->add_flag("--print", print_config, "print the resolved config");

  auto* dg = app.add_subcommand("dump-gp", "print the log-domain program for a scenario's K2 set");
  dg->add_option("--config", config_path, "config file (JSON)");
  dg->add_option("--seed", seed, "seed (default: config seed)");
  dg->add_option("--objective", dump_objective, "sum-rate|max-min|min-ris")->required();
  dg->add_option("--out", dump_out, "write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    const NetworkConfig config = load_config(config_path);

    if (vc->parsed()) {
      if (print_config) std::cout << serialize_config(config);
      std::cout << "config ok (hash " << config_hash(config) << ")\n";
      return kExitOk;
    }

    if (dg->parsed()) {
      const auto objs = parse_objectives(dump_objective);
      if (objs.size() != 1 || objs[0] == Objective::proportional)
        throw UsageError("dump-gp needs one of sum-rate|max-min|min-ris");
      const auto s = build_scenario(config, seed.value_or(config.seed));
      std::ostringstream os;
      os << "# objective: " << objective_label(objs[0]) << "\n";
      os << "# K2 size: " << s.problem.size() << "\n";
      if (s.problem.size() == 0) {
        os << "# empty K2 set, no program\n";
      } else if (const auto why = s.problem.infeasibility_reason(); !why.empty()) {
        os << "# infeasible instance: " << why << "\n";
      } else {
        os << gp::dump(gp::to_log_convex(build_problem(s.problem, objs[0])));
      }
      if (dump_out.empty()) {
        std::cout << os.str();
      } else {
        write_file_atomic(dump_out, os.str());
      }
      return kExitOk;
    }

    RunManifest manifest;
    manifest.config = config;
    const auto objs = parse_objectives(run->parsed() ? run_objective : sweep_objective);
    for (auto o : objs) manifest.objectives.push_back(to_string(o));

    Report rep;
    if (run->parsed()) {
      if (seed && !seeds.empty()) throw UsageError("use either --seed or --seeds");
      manifest.command = "run";
      manifest.seeds = !seeds.empty() ? parse_seed_range(seeds) : std::vector<std::uint64_t>{seed.value_or(config.seed)};
      write_manifest(out_dir, manifest);
      for (auto s : manifest.seeds) {
        spdlog::info("run seed {}", s);
        rep.records.push_back(run_scenario(config, s, objs));
      }
    } else {
      const auto ax = axis_from_string(axis);
      if (!ax) throw UsageError("unknown axis '" + axis + "'");
      SweepSpec spec;
      spec.axis = *ax;
      spec.values = values.empty() ? default_axis_values(*ax) : parse_values(values);
      spec.seeds = seeds.empty() ? default_seeds() : parse_seed_range(seeds);
      spec.objectives = objs;
      manifest.command = "sweep";
      manifest.seeds = spec.seeds;
      manifest.axis = to_string(*ax);
      manifest.axis_values = spec.values;
      for (double v : spec.values) apply_axis(config, *ax, v);  // reject bad points up front
      write_manifest(out_dir, manifest);
      spdlog::info("sweep {} x {} seeds on {} job(s)", spec.values.size(), spec.seeds.size(), jobs);
      rep = sweep(spec, config, jobs);
    }
    write_file_atomic(fs::path(out_dir) / "report.csv", to_csv(rep));
    write_file_atomic(fs::path(out_dir) / "report.json", to_json(rep, manifest).dump(2) + "\n");
    return exit_code_for(rep);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
