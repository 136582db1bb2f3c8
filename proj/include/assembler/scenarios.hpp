#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "assembler/initializer.hpp"
#include "assembler/optimize.hpp"
#include "assembler/statics.hpp"

namespace assembler {

struct ScenarioSpec {
  std::string name;
  std::string title;
  TaaPose goal;
  MassModel masses;
  OptimizerConfig config;
  // Helper-arm IK seed (3n angles) used instead of the setup's default.
  std::optional<Eigen::VectorXd> helper_seed;
};

// Everything a run needs besides the scenario itself.
struct Setup {
  AssemblerStack stack;
  MassModel masses;
  InitializerParams initializer;
  OptimizerConfig optimizer;
  std::vector<ScenarioSpec> scenarios;
};

// Default stack, masses, solver settings and the five built-in scenarios.
Setup default_setup();

// horizontal_translation, end_effector_90, inchworm_pre_contact,
// vertical_lift, orientation_transition.
std::vector<ScenarioSpec> builtin_scenarios();

const ScenarioSpec& find_scenario(const Setup& setup, const std::string& name);

struct ScenarioReport {
  ScenarioSpec spec;
  bool feasible = false;  // initializer succeeded
  bool converged = false;
  int iterations = 0;
  double link_length = 0.0;
  StackPose initial_pose;
  StackPose final_pose;
  ForceMatrix init_forces;
  ForceMatrix final_forces;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  double max_abs_initial = 0.0;
  double max_abs_final = 0.0;
  double mean_abs_initial = 0.0;
  double mean_abs_final = 0.0;
  ConstraintReport final_constraints;
  double runtime = 0.0;  // seconds
};

double max_abs(const ForceMatrix& forces);
double mean_abs(const ForceMatrix& forces);

ScenarioReport run_scenario(const Setup& setup, const ScenarioSpec& spec);
ScenarioReport run_scenario(const ScenarioSpec& spec);

// Two blocks, "initial" then "final", each a header SP1..SPn followed by six
// rows of forces with three decimals.
std::string render_force_table(const ScenarioReport& report);
std::string render_force_block(const std::string& label, const ForceMatrix& forces);

struct ForceTable {
  std::vector<std::pair<std::string, ForceMatrix>> blocks;
};

// Throws ParseError on malformed input.
ForceTable parse_force_table(const std::string& text);

}  // namespace assembler
