// Command-line front end over the C API.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "assembler/assembler_c.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitViolation = 3;

struct Owned {
  char* s = nullptr;
  ~Owned() { asm_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

struct Context {
  asm_context* ctx = nullptr;
  ~Context() { asm_context_destroy(ctx); }
};

bool check(asm_status status, const std::string& what) {
  if (status == ASM_OK) return true;
  std::fprintf(stderr, "error: %s: %s\n", what.c_str(), asm_last_error());
  return false;
}

bool open_context(const std::string& config, Context& c) {
  return check(asm_context_create(config.empty() ? nullptr : config.c_str(), &c.ctx), "loading configuration");
}

bool write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::fprintf(stderr, "error: cannot write %s\n", path.string().c_str());
    return false;
  }
  return true;
}

struct RunOutcome {
  std::string log;
  std::string error;
  bool feasible = false;
  bool satisfied = false;
};

RunOutcome run_one(const asm_context* ctx, const std::string& name, const std::filesystem::path& out_dir) {
  RunOutcome o;
  asm_report* report = nullptr;
  if (asm_run_scenario(ctx, name.c_str(), &report) != ASM_OK) {
    o.error = "error: scenario " + name + ": " + asm_last_error() + "\n";
    return o;
  }
  asm_report_summary s{};
  asm_report_summary_get(report, &s);
  Owned json, csv, pose0, pose1;
  const bool ok = asm_report_json(report, &json.s) == ASM_OK && asm_report_force_csv(report, &csv.s) == ASM_OK &&
                  asm_report_pose_json(report, ASM_POSE_INITIAL, &pose0.s) == ASM_OK &&
                  asm_report_pose_json(report, ASM_POSE_FINAL, &pose1.s) == ASM_OK;
  asm_report_destroy(report);
  if (!ok) {
    o.error = "error: scenario " + name + ": " + asm_last_error() + "\n";
    return o;
  }
  if (!write_text(out_dir / (name + ".report.json"), json.str()) ||
      !write_text(out_dir / (name + ".forces.csv"), csv.str()) ||
      !write_text(out_dir / (name + ".pose_initial"), pose0.str()) ||
      !write_text(out_dir / (name + ".pose_final"), pose1.str())) {
    o.error = "error: scenario " + name + ": writing outputs failed\n";
    return o;
  }
  o.feasible = s.feasible != 0;
  o.satisfied = s.constraints_satisfied != 0;
  char line[512];
  if (!o.feasible) {
    std::snprintf(line, sizeof line, "%-24s initializer failed\n", name.c_str());
  } else {
    std::snprintf(line, sizeof line,
                  "%-24s max|F| %8.3f -> %8.3f N  mean|F| %7.3f -> %7.3f N  objective %8.3f -> %8.3f  %s%s  %.2fs\n",
                  name.c_str(), s.max_abs_initial, s.max_abs_final, s.mean_abs_initial, s.mean_abs_final,
                  s.objective_initial, s.objective_final, s.converged ? "converged" : "not converged",
                  o.satisfied ? "" : "  CONSTRAINT VIOLATION", s.runtime_seconds);
  }
  o.log = line;
  return o;
}

std::vector<std::string> scenario_names(const asm_context* ctx) {
  std::vector<std::string> names;
  size_t count = 0;
  asm_scenario_count(ctx, &count);
  for (size_t i = 0; i < count; ++i) {
    Owned name;
    if (asm_scenario_name(ctx, i, &name.s) == ASM_OK) names.push_back(name.str());
  }
  return names;
}

std::vector<double> parse_goal(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    v.push_back(std::stod(cell, &used));
    if (used != cell.size()) throw std::invalid_argument(cell);
  }
  if (v.size() != 6) throw std::invalid_argument("need six values");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Force-optimal poses for stacked Stewart platforms"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Initialize, optimize and report scenarios");
  std::string scenario;
  bool all = false;
  std::string out_dir = ".";
  unsigned jobs = 0;
  auto* scenario_opt = run->add_option("--scenario", scenario, "Scenario name");
  auto* all_opt = run->add_flag("--all", all, "Run every scenario");
  scenario_opt->excludes(all_opt);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Parallel scenario runs for --all (default: hardware threads)");

  auto* ik = app.add_subcommand("ik", "Initial-condition solve for an end-effector goal");
  std::string goal_text;
  ik->add_option("--goal", goal_text, "x,y,z,rx,ry,rz (meters, axis-angle radians)")->required();

  auto* forces = app.add_subcommand("forces", "Leg forces for a stored pose");
  std::string pose_path;
  forces->add_option("--pose", pose_path, "Pose JSON file")->required()->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list-scenarios", "Print scenario names");

  for (auto* sub : {run, ik, forces, list}) {
    sub->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  Context c;
  if (!open_context(config, c)) return kExitError;

  if (list->parsed()) {
    for (const auto& name : scenario_names(c.ctx)) std::printf("%s\n", name.c_str());
    return 0;
  }

  if (ik->parsed()) {
    std::vector<double> goal;
    try {
      goal = parse_goal(goal_text);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: --goal needs six comma-separated numbers\n");
      return kExitError;
    }
    int feasible = 0;
    Owned pose;
    if (!check(asm_solve_ik(c.ctx, goal.data(), &feasible, &pose.s), "ik")) return kExitError;
    std::fputs(pose.str().c_str(), stdout);
    if (!feasible) {
      std::fprintf(stderr, "initializer found no feasible pose; printed the home pose\n");
      return kExitInfeasible;
    }
    return 0;
  }

  if (forces->parsed()) {
    std::ifstream in(pose_path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    Owned csv;
    if (!check(asm_forces_from_pose(c.ctx, text.str().c_str(), &csv.s), "forces")) return kExitError;
    std::fputs(csv.str().c_str(), stdout);
    return 0;
  }

  // run
  std::vector<std::string> names;
  if (all) {
    names = scenario_names(c.ctx);
  } else if (!scenario.empty()) {
    names.push_back(scenario);
  } else {
    std::fprintf(stderr, "error: run needs --scenario NAME or --all\n");
    return kExitError;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create %s: %s\n", out_dir.c_str(), ec.message().c_str());
    return kExitError;
  }

  std::vector<RunOutcome> outcomes(names.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(jobs ? jobs : std::thread::hardware_concurrency(), names.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < names.size(); i = next++) outcomes[i] = run_one(c.ctx, names[i], out_dir);
    });
  }
  for (auto& t : pool) t.join();

  bool error = false, infeasible = false, violated = false;
  for (const auto& o : outcomes) {
    std::fputs(o.log.c_str(), stdout);
    std::fputs(o.error.c_str(), stderr);
    error |= !o.error.empty();
    infeasible |= o.error.empty() && !o.feasible;
    violated |= o.error.empty() && o.feasible && !o.satisfied;
  }
  if (error) return kExitError;
  if (infeasible) return kExitInfeasible;
  if (violated) return kExitViolation;
  return 0;
}
