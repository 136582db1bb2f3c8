#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "assembler/initializer.hpp"
#include "assembler/stack.hpp"
#include "assembler/statics.hpp"

namespace assembler {

struct OptimizerConfig {
  double w1 = 1.0;
  double w2 = 1.0;
  Vec6 pose_tolerances = (Vec6() << 1e-3, 1e-3, 1e-3, 1e-2, 1e-2, 1e-2).finished();
  double f_tension_max = 200.0;
  double f_compression_max = 200.0;
  int max_iterations = 500;
  double constraint_tolerance = 1e-6;
  double convergence_tolerance = 1e-7;
  double gradient_step = 1e-6;
  double initial_trust_radius = 0.05;
  // Replace max|F| by a log-sum-exp soft maximum with temperature `softmax_beta` (1/N).
  bool smooth_max = false;
  double softmax_beta = 50.0;
};

void validate(const OptimizerConfig& config);

struct ConstraintGroup {
  std::string name;
  Eigen::VectorXd margins;  // >= 0 means satisfied

  double worst() const;
};

struct ConstraintReport {
  std::vector<ConstraintGroup> groups;  // leg_min, leg_max, deviation, force_tension,
                                        // force_compression, ee_tolerance, z_continuity

  double worst() const;
  bool satisfied(double tolerance) const;
  const ConstraintGroup& group(const std::string& name) const;
};

// Angle between each plate's offset from its predecessor and the
// predecessor's local z axis (n entries).
Eigen::VectorXd plate_deviation_angles(const AssemblerStack& stack, const StackPose& pose);

// Singular or degenerate poses evaluate to kSingularObjective.
inline constexpr double kSingularObjective = 1e9;

double objective(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                 const StackPose& pose);
double objective(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                 const DecisionVector& x, const Transform& goal);

// Per-DOF end-effector error: translation difference and the axis-angle
// vector of R_ee * R_goal^T.
Vec6 end_effector_error(const Transform& end_effector, const Transform& goal);

ConstraintReport constraints(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                             const StackPose& pose, const Transform& goal);
ConstraintReport constraints(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                             const DecisionVector& x, const Transform& goal);

struct OptimizationResult {
  StackPose pose;
  LegMatrix leg_matrix;
  ForceMatrix forces;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  ConstraintReport constraint_report;
  bool converged = false;
  int iterations = 0;
};

// Feasible-iterate SQP over the interior plates; the end effector stays at
// `goal`. Returns the best feasible iterate, never worse than the start.
OptimizationResult optimize_pose(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                                 const Transform& goal, const InitResult& init);

}  // namespace assembler
