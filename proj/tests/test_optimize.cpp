#include <doctest.h>

#include "assembler/error.hpp"
#include "assembler/optimize.hpp"
#include "assembler/statics.hpp"
#include "support.hpp"

using namespace assembler;
using testing::random_stack_pose;
using testing::random_transform;

namespace {

InitResult as_init(const AssemblerStack& stack, const StackPose& pose) {
  InitResult init;
  init.pose = pose;
  init.leg_matrix = stack_leg_matrix(stack, pose);
  init.feasible = true;
  return init;
}

}  // namespace

TEST_CASE("plate deviation angles") {
  const AssemblerStack stack = default_stack(4);
  const double d0 = stack.platforms[0].home_height;
  CHECK(plate_deviation_angles(stack, home_pose(stack)).cwiseAbs().maxCoeff() == 0.0);

  StackPose shifted = home_pose(stack);
  const double d = 0.07;
  shifted.plates[1].translation.x() += d;
  const Eigen::VectorXd lambda = plate_deviation_angles(stack, shifted);
  CHECK(lambda[0] == doctest::Approx(std::atan(d / d0)).epsilon(1e-12));
  CHECK(lambda[1] == doctest::Approx(std::atan(d / d0)).epsilon(1e-12));
  CHECK(lambda[2] == 0.0);

  const StackPose pose = random_stack_pose(stack);
  const Transform common = random_transform();
  StackPose moved = pose;
  for (auto& p : moved.plates) p = common * p;
  CHECK((plate_deviation_angles(stack, moved) - plate_deviation_angles(stack, pose)).cwiseAbs().maxCoeff() < 1e-9);

  StackPose collapsed = home_pose(stack);
  collapsed.plates[2] = collapsed.plates[1];
  CHECK_THROWS_AS(plate_deviation_angles(stack, collapsed), DegenerateConfiguration);
}

TEST_CASE("objective decomposes into force and deviation terms") {
  const AssemblerStack stack = default_stack(4);
  const MassModel masses = mass_model_from_stack(stack);
  OptimizerConfig config;

  CHECK(objective(stack, mass_model_from_stack(stack, Vec3::Zero()), config, home_pose(stack)) == 0.0);

  for (int t = 0; t < 20; ++t) {
    const StackPose pose = random_stack_pose(stack);
    const double fmax = stack_leg_forces(stack, pose, masses).cwiseAbs().maxCoeff();
    const double rss = plate_deviation_angles(stack, pose).norm();
    config.w1 = 0.7;
    config.w2 = 2.5;
    CHECK(std::abs(objective(stack, masses, config, pose) - (0.7 * fmax + 2.5 * rss)) < 1e-12 * (1 + fmax));
    config.w1 = 0.0;
    config.w2 = 1.0;
    CHECK(objective(stack, masses, config, pose) == doctest::Approx(rss).epsilon(1e-14));
    config.w1 = 1.0;
    config.w2 = 0.0;
    CHECK(objective(stack, masses, config, pose) == doctest::Approx(fmax).epsilon(1e-14));
    const DecisionVector x = pack_decision(stack, pose);
    CHECK(objective(stack, masses, config, x, pose.end_effector()) ==
          doctest::Approx(objective(stack, masses, config, pose)).epsilon(1e-10));
  }
}

TEST_CASE("smooth maximum bounds the hard maximum") {
  const AssemblerStack stack = default_stack(4);
  const MassModel masses = mass_model_from_stack(stack);
  OptimizerConfig hard, smooth;
  hard.w2 = smooth.w2 = 0.0;
  smooth.smooth_max = true;
  const StackPose pose = random_stack_pose(stack);
  const double h = objective(stack, masses, hard, pose);
  const double s = objective(stack, masses, smooth, pose);
  CHECK(s >= h);
  CHECK(s <= h + std::log(24.0) / smooth.softmax_beta + 1e-12);
}

TEST_CASE("singular pose evaluates to the sentinel") {
  AssemblerStack stack = default_stack(2);
  stack.platforms[0] = testing::paired_geometry(stack.platforms[0].home_height);
  stack.platforms[1] = testing::paired_geometry(stack.platforms[1].home_height);
  const MassModel masses = mass_model_from_stack(stack);
  CHECK(objective(stack, masses, OptimizerConfig{}, home_pose(stack)) == kSingularObjective);
  const ConstraintReport r = constraints(stack, masses, OptimizerConfig{}, home_pose(stack), home_pose(stack).end_effector());
  CHECK(r.group("force_tension").worst() == -kSingularObjective);
}

TEST_CASE("end effector error") {
  CHECK(end_effector_error(Transform::identity(), Transform::identity()).norm() == 0.0);
  Transform a;
  a.translation = Vec3(0.1, 0.2, 0.3);
  a.rotation = testing::oracle_rotation(Vec3::UnitY(), 0.05);
  const Vec6 e = end_effector_error(a, Transform::identity());
  CHECK((e.head<3>() - a.translation).norm() < 1e-15);
  CHECK((e.tail<3>() - Vec3(0, 0.05, 0)).norm() < 1e-12);
}

TEST_CASE("constraint report") {
  const AssemblerStack stack = default_stack(4);
  const MassModel masses = mass_model_from_stack(stack);
  const OptimizerConfig config;

  SUBCASE("home satisfies everything") {
    const StackPose home = home_pose(stack);
    const ConstraintReport r = constraints(stack, masses, config, home, home.end_effector());
    REQUIRE(r.groups.size() == 7);
    const char* names[] = {"leg_min", "leg_max", "deviation", "force_tension", "force_compression",
                           "ee_tolerance", "z_continuity"};
    for (int i = 0; i < 7; ++i) CHECK(r.groups[static_cast<std::size_t>(i)].name == names[i]);
    CHECK(r.worst() > 0.0);
    CHECK(r.satisfied(0.0));
    CHECK_THROWS_AS(r.group("nope"), InvalidArgument);
  }
  SUBCASE("uniformly stretched legs violate leg_max by the excess") {
    // Pure vertical stretch of the top platform: every leg grows to leg_max + 0.01.
    const PlatformGeometry& g = stack.platforms[3];
    const double target = g.leg_max + 0.01;
    const AnchorPositions a = anchor_positions_global(g, {Transform::identity(), Transform::identity()});
    const Eigen::Vector2d radial = (a.top[0] - a.bottom[0]).head<2>();
    const double z = std::sqrt(target * target - radial.squaredNorm());
    StackPose pose = home_pose(stack);
    pose.plates[4].translation.z() = pose.plates[3].translation.z() + z;
    const ConstraintReport r = constraints(stack, masses, config, pose, pose.end_effector());
    CHECK(r.group("leg_max").worst() == doctest::Approx(-0.01).epsilon(1e-9));
    CHECK_FALSE(r.satisfied(1e-6));
  }
  SUBCASE("margins match a direct recomputation") {
    const StackPose pose = random_stack_pose(stack);
    Transform goal = pose.end_effector();
    goal.translation.x() += 5e-4;
    const ConstraintReport r = constraints(stack, masses, config, pose, goal);
    const LegMatrix legs = stack_leg_matrix(stack, pose);
    const ForceMatrix f = stack_leg_forces(stack, pose, masses);
    for (std::size_t k = 0; k < 4; ++k) {
      const PlatformGeometry& g = stack.platforms[k];
      const LegVector th = deviation_angles(g, pose.platform(k));
      for (int i = 0; i < 6; ++i) {
        const auto idx = static_cast<Eigen::Index>(6 * k) + i;
        const auto col = static_cast<Eigen::Index>(k);
        CHECK(r.group("leg_min").margins[idx] == doctest::Approx(legs(i, col) - g.leg_min));
        CHECK(r.group("leg_max").margins[idx] == doctest::Approx(g.leg_max - legs(i, col)));
        CHECK(r.group("deviation").margins[idx] == doctest::Approx(g.theta_max - th[i]));
        CHECK(r.group("force_tension").margins[idx] == doctest::Approx(200.0 - f(i, col)));
        CHECK(r.group("force_compression").margins[idx] == doctest::Approx(f(i, col) + 200.0));
      }
    }
    CHECK(r.group("ee_tolerance").margins[0] == doctest::Approx(1e-3 - 5e-4));
    CHECK(r.group("ee_tolerance").margins[3] == doctest::Approx(1e-2));
  }
}

TEST_CASE("optimizer") {
  const AssemblerStack stack = default_stack(4);
  const MassModel masses = mass_model_from_stack(stack);
  OptimizerConfig config;

  SUBCASE("weightless home stays home") {
    const StackPose home = home_pose(stack);
    const OptimizationResult r =
        optimize_pose(stack, mass_model_from_stack(stack, Vec3::Zero()), config, home.end_effector(), as_init(stack, home));
    CHECK(r.objective_final == 0.0);
    for (std::size_t k = 0; k < 5; ++k) CHECK(max_abs_difference(r.pose.plates[k], home.plates[k]) < 1e-9);
  }
  SUBCASE("infeasible start is rejected") {
    InitResult init = as_init(stack, home_pose(stack));
    init.feasible = false;
    CHECK_THROWS_AS(optimize_pose(stack, masses, config, init.pose.end_effector(), init), InvalidArgument);
  }
  SUBCASE("never worse than the start and feasible") {
    config.max_iterations = 60;
    int ran = 0;
    for (int t = 0; t < 5; ++t) {
      const StackPose pose = random_stack_pose(stack, 0.25, 0.01);
      const Transform goal = pose.end_effector();
      const ConstraintReport start = constraints(stack, masses, config, pose, goal);
      if (!start.satisfied(0.0)) continue;
      ++ran;
      const OptimizationResult r = optimize_pose(stack, masses, config, goal, as_init(stack, pose));
      CHECK(r.objective_final <= r.objective_initial);
      CHECK(r.objective_initial == doctest::Approx(objective(stack, masses, config, pose)));
      CHECK(r.constraint_report.satisfied(config.constraint_tolerance));
      CHECK(max_abs_difference(r.pose.end_effector(), goal) == 0.0);
      CHECK((r.forces - stack_leg_forces(stack, r.pose, masses)).cwiseAbs().maxCoeff() == 0.0);
      CHECK((r.leg_matrix - stack_leg_matrix(stack, r.pose)).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(ran >= 3);
  }
  SUBCASE("zero iterations returns the start") {
    config.max_iterations = 0;
    const StackPose pose = random_stack_pose(stack);
    const OptimizationResult r = optimize_pose(stack, masses, config, pose.end_effector(), as_init(stack, pose));
    CHECK(r.objective_final == doctest::Approx(r.objective_initial).epsilon(1e-12));
    CHECK(r.iterations == 0);
  }
  SUBCASE("smooth mode also improves") {
    config.smooth_max = true;
    config.max_iterations = 40;
    const StackPose pose = random_stack_pose(stack, 0.25, 0.01);
    const OptimizationResult r = optimize_pose(stack, masses, config, pose.end_effector(), as_init(stack, pose));
    CHECK(r.objective_final <= r.objective_initial);
    CHECK(r.constraint_report.satisfied(config.constraint_tolerance));
  }
  SUBCASE("config validation") {
    config.w1 = -1.0;
    CHECK_THROWS_AS(validate(config), InvalidArgument);
    config = {};
    config.pose_tolerances[2] = 0.0;
    CHECK_THROWS_AS(validate(config), InvalidArgument);
  }
}
