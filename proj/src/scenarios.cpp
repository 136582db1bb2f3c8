#include "assembler/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "assembler/error.hpp"

namespace assembler {

namespace {

constexpr double kPi = std::numbers::pi;

// 3n helper seed with `pattern` cycled over one joint axis of every cluster.
Eigen::VectorXd cluster_seed(std::size_t n, int axis, const std::vector<double>& pattern) {
  Eigen::VectorXd seed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n));
  for (std::size_t c = 0; c < n; ++c) seed[static_cast<Eigen::Index>(3 * c) + axis] = pattern[c % pattern.size()];
  return seed;
}

ScenarioSpec make_spec(std::string name, std::string title, const Vec3& translation, const Vec3& rotation) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.title = std::move(title);
  s.goal = {translation, rotation};
  return s;
}

}  // namespace

std::vector<ScenarioSpec> builtin_scenarios() {
  constexpr std::size_t n = 4;
  std::vector<ScenarioSpec> specs;

  const double home = static_cast<double>(n) * default_platform().home_height;

  // Level end effector 0.8 m out at home height. The helper arm starts
  // zig-zagged sideways so the initial pose is far from optimal.
  specs.push_back(make_spec("horizontal_translation", "0.8m Horizontal Translation", {0.8, 0.0, home}, Vec3::Zero()));
  specs.back().helper_seed = cluster_seed(n, 0, {0.3, -0.3});

  specs.push_back(make_spec("end_effector_90", "End Effector 90 Degrees Relative to the Base Plate", {0.2, 0.0, 1.2},
                            {0.0, 0.5 * kPi, 0.0}));

  specs.push_back(make_spec("inchworm_pre_contact", "Inchworming Pre-Contact", {0.9, 0.0, 0.25}, {0.0, kPi, 0.0}));

  // A straight helper arm cannot shorten along its own axis, so it starts bent.
  specs.push_back(make_spec("vertical_lift", "Assembler Vertical Lift", {0.0, 0.0, 1.2}, Vec3::Zero()));
  specs.back().helper_seed = cluster_seed(n, 1, {0.3, -0.6, 0.6, -0.3});

  specs.push_back(
      make_spec("orientation_transition", "Orientation Transition", {0.2, 0.0, 1.4}, {kPi / 3.0, 0.0, 0.0}));
  return specs;
}

Setup default_setup() {
  Setup setup;
  setup.stack = default_stack(4);
  setup.masses = mass_model_from_stack(setup.stack);
  setup.scenarios = builtin_scenarios();
  for (auto& s : setup.scenarios) {
    s.masses = setup.masses;
    s.config = setup.optimizer;
  }
  return setup;
}

const ScenarioSpec& find_scenario(const Setup& setup, const std::string& name) {
  for (const auto& s : setup.scenarios) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("unknown scenario '" + name + "'");
}

double max_abs(const ForceMatrix& forces) { return forces.size() == 0 ? 0.0 : forces.cwiseAbs().maxCoeff(); }

double mean_abs(const ForceMatrix& forces) { return forces.size() == 0 ? 0.0 : forces.cwiseAbs().mean(); }

ScenarioReport run_scenario(const Setup& setup, const ScenarioSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  if (!spec.goal.translation.allFinite() || !spec.goal.rotation.allFinite()) {
    throw InvalidArgument("scenario '" + spec.name + "' has a non-finite goal");
  }
  ScenarioReport r;
  r.spec = spec;
  const Transform goal = transform_from_taa(spec.goal);

  InitializerParams params = setup.initializer;
  if (spec.helper_seed) params.seed = *spec.helper_seed;
  const PoseAcceptor accept = [&](const StackPose& pose) {
    return constraints(setup.stack, spec.masses, spec.config, pose, goal).satisfied(0.0);
  };
  const InitResult init = initial_condition(setup.stack, goal, params, accept);
  r.feasible = init.feasible;
  r.link_length = init.link_length;
  r.initial_pose = init.pose;
  r.init_forces = stack_leg_forces(setup.stack, init.pose, spec.masses);
  r.objective_initial = objective(setup.stack, spec.masses, spec.config, init.pose);

  if (init.feasible) {
    const OptimizationResult opt = optimize_pose(setup.stack, spec.masses, spec.config, goal, init);
    r.final_pose = opt.pose;
    r.final_forces = opt.forces;
    r.objective_final = opt.objective_final;
    r.final_constraints = opt.constraint_report;
    r.converged = opt.converged;
    r.iterations = opt.iterations;
  } else {
    r.final_pose = init.pose;
    r.final_forces = r.init_forces;
    r.objective_final = r.objective_initial;
    r.final_constraints = constraints(setup.stack, spec.masses, spec.config, init.pose, goal);
  }
  r.max_abs_initial = max_abs(r.init_forces);
  r.max_abs_final = max_abs(r.final_forces);
  r.mean_abs_initial = mean_abs(r.init_forces);
  r.mean_abs_final = mean_abs(r.final_forces);
  r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ScenarioReport run_scenario(const ScenarioSpec& spec) { return run_scenario(default_setup(), spec); }

std::string render_force_block(const std::string& label, const ForceMatrix& forces) {
  std::string out = label + "\n";
  for (Eigen::Index k = 0; k < forces.cols(); ++k) {
    out += (k ? ",SP" : "SP") + std::to_string(k + 1);
  }
  out += "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < forces.rows(); ++i) {
    for (Eigen::Index k = 0; k < forces.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.3f", forces(i, k));
      std::string cell = buf;
      if (cell == "-0.000") cell = "0.000";
      out += (k ? "," : "") + cell;
    }
    out += "\n";
  }
  return out;
}

std::string render_force_table(const ScenarioReport& report) {
  return render_force_block("initial", report.init_forces) + "\n" + render_force_block("final", report.final_forces);
}

ForceTable parse_force_table(const std::string& text) {
  ForceTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::string label;
  std::size_t columns = 0;
  std::vector<std::vector<double>> rows;

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  auto flush = [&] {
    if (label.empty()) return;
    if (rows.empty()) throw ParseError("force block '" + label + "' has no rows");
    ForceMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t k = 0; k < columns; ++k) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
    table.blocks.emplace_back(label, m);
    label.clear();
    columns = 0;
    rows.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto cells = split(line);
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (label.empty()) {
      if (cells.size() != 1) throw ParseError("expected a block label" + where);
      label = line;
      continue;
    }
    if (columns == 0) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] != "SP" + std::to_string(k + 1)) throw ParseError("expected header SP1..SPn" + where);
      }
      columns = cells.size();
      continue;
    }
    if (cells.size() != columns) throw ParseError("row width differs from header" + where);
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + c + "'" + where);
      }
      if (used != c.size() || !std::isfinite(v)) throw ParseError("bad number '" + c + "'" + where);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (columns == 0 && !label.empty()) throw ParseError("force block '" + label + "' has no header");
  flush();
  return table;
}

}  // namespace assembler
