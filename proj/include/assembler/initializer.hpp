#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "assembler/spatial.hpp"
#include "assembler/stack.hpp"

namespace assembler {

// Virtual 3n-DOF serial arm used to seed the stack. Each cluster holds three
// co-located revolute joints about local x, y, z (applied in that order). The
// clusters sit at the mid-height of each platform: base -> d/2 -> cluster 1 ->
// d -> ... -> cluster n -> d/2 -> tip, so zero angles reach n*d straight up.
struct HelperArm {
  std::size_t clusters = 0;
  double link_length = 0.0;
  Transform base;
  Eigen::VectorXd joint_min;
  Eigen::VectorXd joint_max;

  std::size_t dof() const { return 3 * clusters; }
  Transform tip(const Eigen::VectorXd& angles) const;
  // Frame at each cluster after its three rotations.
  std::vector<Transform> cluster_frames(const Eigen::VectorXd& angles) const;
  // 6 x 3n geometric Jacobian, rows (linear; angular) in the world frame.
  Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const Eigen::VectorXd& angles) const;
};

// Symmetric limits per joint axis (x, y, z joints of every cluster).
HelperArm build_helper_arm(std::size_t n, double link_length, const Vec3& axis_limits,
                           const Transform& base = Transform::identity());
HelperArm build_helper_arm(std::size_t n, double link_length, double joint_limit = 0.5235987755982988,
                           const Transform& base = Transform::identity());

// Helper joint limits for a stack: the smallest top-plate rotational limit of
// any platform, per axis.
Vec3 helper_joint_limits(const AssemblerStack& stack);

struct HelperIkOptions {
  double damping = 0.05;
  double max_step = 0.2;
  int max_iterations = 300;
  double translation_tolerance = 1e-3;
  double rotation_tolerance = 1e-2;
};

struct HelperIkResult {
  Eigen::VectorXd angles;
  bool converged = false;
  double translation_error = 0.0;
  double rotation_error = 0.0;
  int iterations = 0;
};

// Damped least squares with joint clamping; joints pinned at a limit and
// pushed further out are frozen for that step.
HelperIkResult helper_arm_ik(const HelperArm& arm, const Transform& goal, const Eigen::VectorXd& seed,
                             const HelperIkOptions& options = {});

// Interior plate k sits halfway between clusters k-1 and k, oriented halfway
// (geodesically) between their frames. Plate 0 is the arm base, plate n the goal.
StackPose place_plates(const HelperArm& arm, const Eigen::VectorXd& angles, const Transform& goal);

struct InitializerParams {
  double d_step = 0.02;
  int recursion_limit = 30;
  double ik_tolerance_translation = 1e-3;
  double ik_tolerance_rotation = 1e-2;
  // Subtracted from the geometry-derived helper joint limits.
  double joint_limit_margin = 0.0;
  // Replaces the geometry-derived helper joint limits (radians, all axes).
  std::optional<double> helper_joint_limit;
  HelperIkOptions ik;
  // Helper IK seed (3n angles); zeros when absent.
  std::optional<Eigen::VectorXd> seed;
};

struct InitResult {
  StackPose pose;
  LegMatrix leg_matrix;
  bool feasible = false;
  double link_length = 0.0;
  int attempts = 0;
};

// Extra acceptance test applied to a candidate pose after the kinematic checks
// (the pipeline uses it to enforce force bounds).
using PoseAcceptor = std::function<bool(const StackPose&)>;

// Link length for attempt `attempt` (0-based): d0, d0+s, d0-s, d0+2s, d0-2s, ...
double scan_link_length(double d0, double step, int attempt);

InitResult initial_condition(const AssemblerStack& stack, const Transform& goal, const InitializerParams& params,
                             const PoseAcceptor& accept = {});

// Leg bounds, deviation limits and z-continuity, worst margin over the stack.
double kinematic_margin(const AssemblerStack& stack, const StackPose& pose);

}  // namespace assembler
