#pragma once

#include <cstddef>

#include "assembler/platform.hpp"
#include "assembler/stack.hpp"

namespace assembler {

using ForceMatrix = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct MassModel {
  double plate_mass = 0.2;
  double motor_mass = 0.1;
  double shaft_mass = 0.04;
  double payload_mass = 5.0;
  double payload_offset = 0.2;  // along the end effector's local z
  Vec3 gravity{0.0, 0.0, -9.81};

  MassModel scaled(double factor) const;
};

// Masses taken from the first platform and the stack payload.
MassModel mass_model_from_stack(const AssemblerStack& stack, const Vec3& gravity = {0.0, 0.0, -9.81});
void validate(const MassModel& masses);

// Force and moment, the moment taken about `reference`.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  Vec3 reference = Vec3::Zero();

  Wrench about(const Vec3& point) const;
};

// Gravity load carried by platform k's legs: plates k+1..n, the actuators of
// platforms above k (motor mass at the bottom anchor, shaft mass at the top
// anchor) and the payload. Reference point is platform k's top plate origin.
Wrench accumulate_wrench_above(const AssemblerStack& stack, const StackPose& pose, const MassModel& masses,
                               std::size_t k);

struct LegForceOptions {
  double max_condition = 1e12;
};

// Signed axial leg forces (positive = tension) holding the top plate against
// `applied`: the legs' forces on the plate, -f_i u_i with u_i pointing from
// bottom to top anchor, cancel the applied wrench.
LegVector platform_leg_forces(const PlatformGeometry& geometry, const PlatformState& state, const Wrench& applied,
                              const LegForceOptions& options = {}, int platform_index = 0);

ForceMatrix stack_leg_forces(const AssemblerStack& stack, const StackPose& pose, const MassModel& masses,
                             const LegForceOptions& options = {});

// Wrench the legs exert on the top plate, about `reference`.
Wrench leg_wrench(const PlatformGeometry& geometry, const PlatformState& state, const LegVector& forces,
                  const Vec3& reference);

}  // namespace assembler
