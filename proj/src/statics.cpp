#include "assembler/statics.hpp"

#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "assembler/error.hpp"

namespace assembler {

MassModel MassModel::scaled(double factor) const {
  MassModel m = *this;
  m.plate_mass *= factor;
  m.motor_mass *= factor;
  m.shaft_mass *= factor;
  m.payload_mass *= factor;
  return m;
}

MassModel mass_model_from_stack(const AssemblerStack& stack, const Vec3& gravity) {
  if (stack.platforms.empty()) throw InvalidArgument("a stack needs at least one platform");
  const PlatformGeometry& p = stack.platforms.front();
  return {p.plate_mass, p.motor_mass, p.shaft_mass, stack.payload_mass, stack.payload_offset, gravity};
}

void validate(const MassModel& m) {
  if (m.plate_mass < 0.0 || m.motor_mass < 0.0 || m.shaft_mass < 0.0 || m.payload_mass < 0.0) {
    throw InvalidArgument("masses must be non-negative");
  }
  if (!m.gravity.allFinite() || !std::isfinite(m.payload_offset)) {
    throw InvalidArgument("mass model has non-finite entries");
  }
}

Wrench Wrench::about(const Vec3& point) const {
  // M_new = M_old + (reference - point) x F
  return {force, moment + (reference - point).cross(force), point};
}

Wrench accumulate_wrench_above(const AssemblerStack& stack, const StackPose& pose, const MassModel& masses,
                               std::size_t k) {
  check_pose(stack, pose);
  const std::size_t n = stack.size();
  if (k >= n) throw InvalidArgument("platform index " + std::to_string(k) + " out of range");

  Wrench w;
  w.reference = pose.plates[k + 1].translation;
  auto add_point_mass = [&](double mass, const Vec3& at) {
    const Vec3 f = mass * masses.gravity;
    w.force += f;
    w.moment += (at - w.reference).cross(f);
  };

  for (std::size_t plate = k + 1; plate <= n; ++plate) {
    add_point_mass(masses.plate_mass, pose.plates[plate].translation);
  }
  for (std::size_t j = k + 1; j < n; ++j) {
    const AnchorPositions a = anchor_positions_global(stack.platforms[j], pose.platform(j));
    for (int i = 0; i < 6; ++i) {
      add_point_mass(masses.motor_mass, a.bottom[i]);
      add_point_mass(masses.shaft_mass, a.top[i]);
    }
  }
  const Transform& ee = pose.end_effector();
  add_point_mass(masses.payload_mass, ee.translation + masses.payload_offset * ee.z_axis());
  return w;
}

namespace {

Eigen::Matrix<double, 6, 6> equilibrium_matrix(const PlatformGeometry& geometry, const PlatformState& state,
                                               const Vec3& reference) {
  const AnchorPositions a = anchor_positions_global(geometry, state);
  Eigen::Matrix<double, 6, 6> m;
  for (int i = 0; i < 6; ++i) {
    const Vec3 leg = a.top[i] - a.bottom[i];
    const double len = leg.norm();
    if (len < 1e-12) throw DegenerateConfiguration("leg " + std::to_string(i + 1) + " has zero length");
    const Vec3 u = leg / len;
    m.block<3, 1>(0, i) = u;
    m.block<3, 1>(3, i) = (a.top[i] - reference).cross(u);
  }
  return m;
}

}  // namespace

LegVector platform_leg_forces(const PlatformGeometry& geometry, const PlatformState& state, const Wrench& applied,
                              const LegForceOptions& options, int platform_index) {
  const Eigen::Matrix<double, 6, 6> m = equilibrium_matrix(geometry, state, applied.reference);
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double condition = sv[5] > 0.0 ? sv[0] / sv[5] : std::numeric_limits<double>::infinity();
  if (!(condition <= options.max_condition)) {
    throw SingularConfiguration("platform " + std::to_string(platform_index + 1) +
                                    " is singular (condition number " + std::to_string(condition) + ")",
                                platform_index);
  }
  Vec6 rhs;
  rhs << applied.force, applied.moment;
  return svd.solve(rhs);
}

ForceMatrix stack_leg_forces(const AssemblerStack& stack, const StackPose& pose, const MassModel& masses,
                             const LegForceOptions& options) {
  check_pose(stack, pose);
  ForceMatrix forces(6, static_cast<Eigen::Index>(stack.size()));
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const Wrench w = accumulate_wrench_above(stack, pose, masses, k);
    forces.col(static_cast<Eigen::Index>(k)) =
        platform_leg_forces(stack.platforms[k], pose.platform(k), w, options, static_cast<int>(k));
  }
  return forces;
}

Wrench leg_wrench(const PlatformGeometry& geometry, const PlatformState& state, const LegVector& forces,
                  const Vec3& reference) {
  const AnchorPositions a = anchor_positions_global(geometry, state);
  Wrench w;
  w.reference = reference;
  for (int i = 0; i < 6; ++i) {
    const Vec3 f = -forces[i] * (a.top[i] - a.bottom[i]).normalized();
    w.force += f;
    w.moment += (a.top[i] - reference).cross(f);
  }
  return w;
}

}  // namespace assembler
