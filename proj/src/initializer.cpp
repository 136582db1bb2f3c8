#include "assembler/initializer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "assembler/error.hpp"

namespace assembler {

namespace {

Mat3 axis_rotation(int axis, double angle) {
  Vec3 r = Vec3::Zero();
  r[axis] = angle;
  return rotation_from_axis_angle(r);
}

Transform lift(double h) { return Transform::from_translation({0.0, 0.0, h}); }

Vec6 pose_error(const Transform& current, const Transform& goal) {
  Vec6 e;
  e.head<3>() = goal.translation - current.translation;
  e.tail<3>() = axis_angle_from_rotation(goal.rotation * current.rotation.transpose());
  return e;
}

double mean_home_height(const AssemblerStack& stack) {
  double sum = 0.0;
  for (const auto& p : stack.platforms) sum += p.home_height;
  return sum / static_cast<double>(stack.size());
}

}  // namespace

std::vector<Transform> HelperArm::cluster_frames(const Eigen::VectorXd& angles) const {
  if (static_cast<std::size_t>(angles.size()) != dof()) {
    throw InvalidArgument("helper arm expects " + std::to_string(dof()) + " joint angles");
  }
  std::vector<Transform> frames;
  frames.reserve(clusters);
  Transform t = base * lift(0.5 * link_length);
  for (std::size_t c = 0; c < clusters; ++c) {
    for (int a = 0; a < 3; ++a) {
      t.rotation = t.rotation * axis_rotation(a, angles[static_cast<Eigen::Index>(3 * c) + a]);
    }
    frames.push_back(t);
    t = t * lift(link_length);
  }
  return frames;
}

Transform HelperArm::tip(const Eigen::VectorXd& angles) const {
  const auto frames = cluster_frames(angles);
  return frames.back() * lift(0.5 * link_length);
}

Eigen::Matrix<double, 6, Eigen::Dynamic> HelperArm::jacobian(const Eigen::VectorXd& angles) const {
  const Vec3 p_tip = tip(angles).translation;
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, static_cast<Eigen::Index>(dof()));
  Transform t = base * lift(0.5 * link_length);
  for (std::size_t c = 0; c < clusters; ++c) {
    for (int a = 0; a < 3; ++a) {
      const Eigen::Index j = static_cast<Eigen::Index>(3 * c) + a;
      const Vec3 axis = t.rotation.col(a);
      jac.block<3, 1>(0, j) = axis.cross(p_tip - t.translation);
      jac.block<3, 1>(3, j) = axis;
      t.rotation = t.rotation * axis_rotation(a, angles[j]);
    }
    t = t * lift(link_length);
  }
  return jac;
}

HelperArm build_helper_arm(std::size_t n, double link_length, const Vec3& axis_limits, const Transform& base) {
  if (n < 1) throw InvalidArgument("helper arm needs at least one joint cluster");
  if (!(link_length > 0.0) || !std::isfinite(link_length)) {
    throw InvalidArgument("helper arm link length must be positive");
  }
  if (!(axis_limits.minCoeff() > 0.0)) throw InvalidArgument("helper arm joint limits must be positive");
  HelperArm arm;
  arm.clusters = n;
  arm.link_length = link_length;
  arm.base = base;
  arm.joint_max = axis_limits.replicate(static_cast<Eigen::Index>(n), 1);
  arm.joint_min = -arm.joint_max;
  return arm;
}

HelperArm build_helper_arm(std::size_t n, double link_length, double joint_limit, const Transform& base) {
  return build_helper_arm(n, link_length, Vec3::Constant(joint_limit), base);
}

Vec3 helper_joint_limits(const AssemblerStack& stack) {
  Vec3 limits = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const auto& p : stack.platforms) limits = limits.cwiseMin(top_plate_rotation_limits(p));
  return limits;
}

HelperIkResult helper_arm_ik(const HelperArm& arm, const Transform& goal, const Eigen::VectorXd& seed,
                             const HelperIkOptions& options) {
  HelperIkResult result;
  result.angles = seed.cwiseMax(arm.joint_min).cwiseMin(arm.joint_max);

  auto measure = [&](const Eigen::VectorXd& q) {
    const Vec6 e = pose_error(arm.tip(q), goal);
    result.translation_error = e.head<3>().norm();
    result.rotation_error = e.tail<3>().norm();
    return e;
  };
  auto done = [&] {
    return result.translation_error <= options.translation_tolerance &&
           result.rotation_error <= options.rotation_tolerance;
  };

  Vec6 err = measure(result.angles);
  const double reach = static_cast<double>(arm.clusters) * arm.link_length;
  if ((goal.translation - arm.base.translation).norm() > reach + options.translation_tolerance) {
    return result;
  }

  const Eigen::Index dof = static_cast<Eigen::Index>(arm.dof());
  const double lambda2 = options.damping * options.damping;
  for (; result.iterations < options.max_iterations && !done(); ++result.iterations) {
    Eigen::Matrix<double, 6, Eigen::Dynamic> jac = arm.jacobian(result.angles);
    Eigen::VectorXd step;
    for (Eigen::Index pass = 0; pass <= dof; ++pass) {
      const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
      step = jac.transpose() * jjt.ldlt().solve(err);
      bool froze = false;
      for (Eigen::Index j = 0; j < dof; ++j) {
        const bool at_max = result.angles[j] >= arm.joint_max[j] && step[j] > 0.0;
        const bool at_min = result.angles[j] <= arm.joint_min[j] && step[j] < 0.0;
        if ((at_max || at_min) && !jac.col(j).isZero()) {
          jac.col(j).setZero();
          froze = true;
        }
      }
      if (!froze) break;
    }
    const double biggest = step.cwiseAbs().maxCoeff();
    if (biggest > options.max_step) step *= options.max_step / biggest;
    result.angles = (result.angles + step).cwiseMax(arm.joint_min).cwiseMin(arm.joint_max);
    err = measure(result.angles);
  }
  result.converged = done();
  return result;
}

StackPose place_plates(const HelperArm& arm, const Eigen::VectorXd& angles, const Transform& goal) {
  const auto frames = arm.cluster_frames(angles);
  StackPose pose;
  pose.plates.reserve(arm.clusters + 1);
  pose.plates.push_back(arm.base);
  for (std::size_t k = 1; k < arm.clusters; ++k) {
    const Transform& below = frames[k - 1];
    const Transform& above = frames[k];
    Transform plate;
    plate.translation = 0.5 * (below.translation + above.translation);
    plate.rotation = interpolate_rotation(below.rotation, above.rotation, 0.5);
    pose.plates.push_back(plate);
  }
  pose.plates.push_back(goal);
  return pose;
}

double scan_link_length(double d0, double step, int attempt) {
  const int k = (attempt + 1) / 2;
  const double sign = (attempt % 2 == 1) ? 1.0 : -1.0;
  return d0 + sign * step * static_cast<double>(k);
}

double kinematic_margin(const AssemblerStack& stack, const StackPose& pose) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const PlatformGeometry& g = stack.platforms[k];
    const PlatformState state = pose.platform(k);
    const LegVector legs = ik_leg_lengths(g, state);
    worst = std::min({worst, legs.minCoeff() - g.leg_min, g.leg_max - legs.maxCoeff()});
    try {
      worst = std::min(worst, g.theta_max - deviation_angles(g, state).maxCoeff());
    } catch (const DegenerateConfiguration&) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return std::min(worst, z_continuity(stack, pose).margins.minCoeff());
}

InitResult initial_condition(const AssemblerStack& stack, const Transform& goal, const InitializerParams& params,
                             const PoseAcceptor& accept) {
  validate(stack);
  if (!(params.d_step > 0.0)) throw InvalidArgument("d_step must be positive");
  if (params.recursion_limit < 1) throw InvalidArgument("recursion_limit must be at least 1");
  if (!is_rotation(goal.rotation, 1e-6) || !goal.translation.allFinite()) {
    throw InvalidArgument("goal is not a valid rigid transform");
  }

  const std::size_t n = stack.size();
  const double d0 = mean_home_height(stack);
  const Vec3 joint_limits =
      (params.helper_joint_limit ? Vec3::Constant(*params.helper_joint_limit) : helper_joint_limits(stack)).array() -
      params.joint_limit_margin;

  HelperIkOptions ik = params.ik;
  ik.translation_tolerance = params.ik_tolerance_translation;
  ik.rotation_tolerance = params.ik_tolerance_rotation;
  const Eigen::VectorXd seed =
      params.seed.value_or(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n)));
  if (static_cast<std::size_t>(seed.size()) != 3 * n) {
    throw InvalidArgument("initializer seed must have 3n entries");
  }

  InitResult result;
  for (int attempt = 0; attempt < params.recursion_limit; ++attempt) {
    result.attempts = attempt + 1;
    const double d = scan_link_length(d0, params.d_step, attempt);
    if (!(d > 0.0)) continue;
    const HelperArm arm = build_helper_arm(n, d, joint_limits, stack.base);
    const HelperIkResult solved = helper_arm_ik(arm, goal, seed, ik);
    if (!solved.converged) continue;
    StackPose pose = place_plates(arm, solved.angles, goal);
    if (kinematic_margin(stack, pose) < 0.0) continue;
    if (accept && !accept(pose)) continue;
    result.pose = std::move(pose);
    result.leg_matrix = stack_leg_matrix(stack, result.pose);
    result.feasible = true;
    result.link_length = d;
    return result;
  }
  result.pose = home_pose(stack);
  result.leg_matrix = stack_leg_matrix(stack, result.pose);
  result.feasible = false;
  return result;
}

}  // namespace assembler
