#include <doctest.h>

#include "assembler/error.hpp"
#include "support.hpp"

using namespace assembler;
using testing::random_stack_pose;
using testing::random_transform;
using testing::uniform;

TEST_CASE("home stack") {
  const AssemblerStack stack = default_stack(4);
  const StackPose pose = home_pose(stack);
  const double d0 = stack.platforms[0].home_height;
  CHECK(pose.plates.size() == 5);
  const Transform ee = stack_fk(stack, pose);
  CHECK((ee.translation - Vec3(0, 0, 4 * d0)).norm() < 1e-12);
  CHECK((ee.rotation - Mat3::Identity()).norm() == 0.0);
  const LegMatrix legs = stack_leg_matrix(stack, pose);
  CHECK(legs.cols() == 4);
  CHECK((legs.array() - stack.platforms[0].leg_mid()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("moving the base moves the end effector with it") {
  AssemblerStack stack = default_stack(4);
  stack.base = Transform::from_translation({0.3, -0.2, 1.0});
  const Transform ee = stack_fk(stack, home_pose(stack));
  CHECK((ee.translation - Vec3(0.3, -0.2, 1.0 + 4 * stack.platforms[0].home_height)).norm() < 1e-12);
}

TEST_CASE("relative product reproduces the stored end effector") {
  const AssemblerStack stack = default_stack(4);
  for (int k = 0; k < 20; ++k) {
    const StackPose pose = random_stack_pose(stack);
    CHECK(max_abs_difference(stack_fk(stack.base, relative_transforms(pose)), stack_fk(stack, pose)) < 1e-9);
  }
}

TEST_CASE("leg matrix columns are per-platform IK") {
  const AssemblerStack stack = default_stack(4);
  const StackPose pose = random_stack_pose(stack);
  const LegMatrix legs = stack_leg_matrix(stack, pose);
  for (std::size_t k = 0; k < 4; ++k) {
    const LegVector direct = ik_leg_lengths(stack.platforms[k], {pose.plates[k], pose.plates[k + 1]});
    CHECK((legs.col(static_cast<Eigen::Index>(k)) - direct).norm() == 0.0);
  }
  // Invariant under a rigid motion of the whole stack.
  const Transform common = random_transform();
  StackPose moved = pose;
  for (auto& p : moved.plates) p = common * p;
  CHECK((stack_leg_matrix(stack, moved) - legs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("single-platform stack") {
  const AssemblerStack stack = default_stack(1);
  StackPose pose = home_pose(stack);
  pose.plates[1] = random_transform(0.2, 0.05) * pose.plates[1];
  const LegMatrix legs = stack_leg_matrix(stack, pose);
  CHECK(legs.cols() == 1);
  CHECK((legs.col(0) - ik_leg_lengths(stack.platforms[0], pose.platform(0))).norm() == 0.0);
  CHECK(decision_size(stack) == 0);
}

TEST_CASE("decision vector packing") {
  const AssemblerStack stack = default_stack(4);
  CHECK(decision_size(stack) == 18);
  const StackPose home = home_pose(stack);
  const DecisionVector x = pack_decision(stack, home);
  REQUIRE(x.size() == 18);
  for (int k = 0; k < 3; ++k) {
    CHECK((x.segment<3>(6 * k) - home.plates[k + 1].translation).norm() == 0.0);
    CHECK(x.segment<3>(6 * k + 3).norm() == 0.0);
  }
  for (int t = 0; t < 50; ++t) {
    DecisionVector r(18);
    for (int i = 0; i < 18; ++i) r[i] = uniform(-1.0, 1.0);
    const Transform goal = random_transform();
    const StackPose pose = unpack_decision(stack, r, goal);
    CHECK(max_abs_difference(pose.end_effector(), goal) == 0.0);
    CHECK((pack_decision(stack, pose) - r).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(unpack_decision(stack, DecisionVector::Zero(17), Transform::identity()), InvalidArgument);
  DecisionVector bad = DecisionVector::Zero(18);
  bad[4] = std::nan("");
  CHECK_THROWS_AS(unpack_decision(stack, bad, Transform::identity()), InvalidArgument);
}

TEST_CASE("z continuity") {
  const AssemblerStack stack = default_stack(4);
  const double d0 = stack.platforms[0].home_height;
  const ZContinuity home = z_continuity(stack, home_pose(stack));
  CHECK(home.ok);
  CHECK((home.margins.array() - d0).abs().maxCoeff() < 1e-12);

  StackPose sunk = home_pose(stack);
  sunk.plates[2].translation.z() = sunk.plates[1].translation.z() - 0.05;
  CHECK_FALSE(z_continuity(stack, sunk).ok);

  const StackPose pose = random_stack_pose(stack);
  const ZContinuity z = z_continuity(stack, pose);
  for (std::size_t k = 0; k < 4; ++k) {
    const PlatformGeometry& g = stack.platforms[k];
    for (int i = 0; i < 6; ++i) {
      const Vec3 top = pose.plates[k + 1].apply(g.top_anchors[i]);
      const Vec3 bottom = pose.plates[k].apply(g.bottom_anchors[i]);
      const Vec3 axis = pose.plates[k].rotation * Vec3::UnitZ();
      CHECK(z.margins(i, static_cast<Eigen::Index>(k)) == doctest::Approx(axis.dot(top - bottom)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pose checks") {
  const AssemblerStack stack = default_stack(4);
  StackPose pose = home_pose(stack);
  pose.plates.pop_back();
  CHECK_THROWS_AS(check_pose(stack, pose), InvalidArgument);
  pose = home_pose(stack);
  pose.plates[2].rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(check_pose(stack, pose), InvalidArgument);
  CHECK_THROWS_AS(default_stack(0), InvalidArgument);
}
