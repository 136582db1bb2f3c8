#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "assembler/platform.hpp"
#include "assembler/spatial.hpp"

namespace assembler {

using LegMatrix = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using DecisionVector = Eigen::VectorXd;

// n platforms sharing plates: platform k spans plates k and k+1 (0-based),
// plate 0 is the base and plate n the end effector.
struct AssemblerStack {
  std::vector<PlatformGeometry> platforms;
  Transform base;
  double payload_mass = 5.0;
  double payload_offset = 0.2;

  std::size_t size() const { return platforms.size(); }
};

AssemblerStack default_stack(std::size_t n = 4);
void validate(const AssemblerStack& stack);

struct StackPose {
  std::vector<Transform> plates;  // n + 1 global plate transforms

  const Transform& end_effector() const { return plates.back(); }
  PlatformState platform(std::size_t k) const { return {plates[k], plates[k + 1]}; }
};

// Every platform at its home height, plates stacked along the base z axis.
StackPose home_pose(const AssemblerStack& stack);

// Throws InvalidArgument when the pose does not fit the stack.
void check_pose(const AssemblerStack& stack, const StackPose& pose);

Transform stack_fk(const AssemblerStack& stack, const StackPose& pose);
// Serial product base * P_1 * ... * P_n over plate-to-plate relative transforms.
Transform stack_fk(const Transform& base, const std::vector<Transform>& relative);
std::vector<Transform> relative_transforms(const StackPose& pose);

LegMatrix stack_leg_matrix(const AssemblerStack& stack, const StackPose& pose);

std::size_t decision_size(const AssemblerStack& stack);
DecisionVector pack_decision(const AssemblerStack& stack, const StackPose& pose);
StackPose unpack_decision(const AssemblerStack& stack, const DecisionVector& x, const Transform& goal);

struct ZContinuity {
  bool ok = true;
  LegMatrix margins;  // top joint minus bottom joint along the bottom plate's z
};

ZContinuity z_continuity(const AssemblerStack& stack, const StackPose& pose);

}  // namespace assembler
