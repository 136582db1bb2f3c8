#include "assembler/stack.hpp"

#include <string>

#include "assembler/error.hpp"

namespace assembler {

AssemblerStack default_stack(std::size_t n) {
  if (n < 1) throw InvalidArgument("a stack needs at least one platform");
  AssemblerStack stack;
  stack.platforms.assign(n, default_platform());
  return stack;
}

void validate(const AssemblerStack& stack) {
  if (stack.platforms.empty()) throw InvalidArgument("a stack needs at least one platform");
  for (const auto& p : stack.platforms) validate(p);
  if (!is_rotation(stack.base.rotation)) throw InvalidArgument("base rotation is not orthonormal");
  if (stack.payload_mass < 0.0) throw InvalidArgument("payload mass must be non-negative");
}

StackPose home_pose(const AssemblerStack& stack) {
  StackPose pose;
  pose.plates.reserve(stack.size() + 1);
  pose.plates.push_back(stack.base);
  for (const auto& p : stack.platforms) pose.plates.push_back(pose.plates.back() * p.home_top());
  return pose;
}

void check_pose(const AssemblerStack& stack, const StackPose& pose) {
  if (pose.plates.size() != stack.size() + 1) {
    throw InvalidArgument("pose has " + std::to_string(pose.plates.size()) + " plates, stack needs " +
                          std::to_string(stack.size() + 1));
  }
  for (const auto& t : pose.plates) {
    if (!is_rotation(t.rotation, 1e-6) || !t.translation.allFinite()) {
      throw InvalidArgument("pose contains an invalid plate transform");
    }
  }
}

Transform stack_fk(const AssemblerStack& stack, const StackPose& pose) {
  check_pose(stack, pose);
  return pose.plates.back();
}

Transform stack_fk(const Transform& base, const std::vector<Transform>& relative) {
  Transform t = base;
  for (const auto& r : relative) t = t * r;
  return t;
}

std::vector<Transform> relative_transforms(const StackPose& pose) {
  std::vector<Transform> rel;
  for (std::size_t k = 1; k < pose.plates.size(); ++k) {
    rel.push_back(pose.plates[k - 1].inverse() * pose.plates[k]);
  }
  return rel;
}

LegMatrix stack_leg_matrix(const AssemblerStack& stack, const StackPose& pose) {
  check_pose(stack, pose);
  LegMatrix legs(6, static_cast<Eigen::Index>(stack.size()));
  for (std::size_t k = 0; k < stack.size(); ++k) {
    legs.col(static_cast<Eigen::Index>(k)) = ik_leg_lengths(stack.platforms[k], pose.platform(k));
  }
  return legs;
}

std::size_t decision_size(const AssemblerStack& stack) { return 6 * (stack.size() - 1); }

DecisionVector pack_decision(const AssemblerStack& stack, const StackPose& pose) {
  check_pose(stack, pose);
  DecisionVector x(static_cast<Eigen::Index>(decision_size(stack)));
  for (std::size_t k = 1; k < stack.size(); ++k) {
    x.segment<6>(static_cast<Eigen::Index>(6 * (k - 1))) = taa_from_transform(pose.plates[k]).as_vector();
  }
  return x;
}

StackPose unpack_decision(const AssemblerStack& stack, const DecisionVector& x, const Transform& goal) {
  if (static_cast<std::size_t>(x.size()) != decision_size(stack)) {
    throw InvalidArgument("decision vector has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(decision_size(stack)));
  }
  if (!x.allFinite()) throw InvalidArgument("decision vector has non-finite entries");
  StackPose pose;
  pose.plates.reserve(stack.size() + 1);
  pose.plates.push_back(stack.base);
  for (std::size_t k = 1; k < stack.size(); ++k) {
    const Vec6 v = x.segment<6>(static_cast<Eigen::Index>(6 * (k - 1)));
    pose.plates.push_back(transform_from_taa(TaaPose::from_vector(v)));
  }
  pose.plates.push_back(goal);
  return pose;
}

ZContinuity z_continuity(const AssemblerStack& stack, const StackPose& pose) {
  check_pose(stack, pose);
  ZContinuity out;
  out.margins.resize(6, static_cast<Eigen::Index>(stack.size()));
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const PlatformState state = pose.platform(k);
    const AnchorPositions a = anchor_positions_global(stack.platforms[k], state);
    const Vec3 axis = state.bottom.z_axis();
    for (int i = 0; i < 6; ++i) {
      const double m = axis.dot(a.top[i] - a.bottom[i]);
      out.margins(i, static_cast<Eigen::Index>(k)) = m;
      if (!(m > 0.0)) out.ok = false;
    }
  }
  return out;
}

}  // namespace assembler
