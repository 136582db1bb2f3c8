#include <doctest.h>

#include "assembler/error.hpp"
#include "assembler/scenarios.hpp"
#include "support.hpp"

using namespace assembler;
using testing::random_transform;
using testing::uniform;

namespace {

// Product of exponentials written out directly with Eigen::AngleAxis.
Transform oracle_tip(const Transform& base, double d, const Eigen::VectorXd& q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = base.rotation;
  t.translation() = base.translation;
  const auto n = q.size() / 3;
  t.translate(Vec3(0, 0, 0.5 * d));
  for (Eigen::Index c = 0; c < n; ++c) {
    t.rotate(Eigen::AngleAxisd(q[3 * c], Vec3::UnitX()));
    t.rotate(Eigen::AngleAxisd(q[3 * c + 1], Vec3::UnitY()));
    t.rotate(Eigen::AngleAxisd(q[3 * c + 2], Vec3::UnitZ()));
    t.translate(Vec3(0, 0, c + 1 < n ? d : 0.5 * d));
  }
  return {t.linear(), t.translation()};
}

Eigen::VectorXd random_angles(std::size_t dof, double limit) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(dof));
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = uniform(-limit, limit);
  return q;
}

}  // namespace

TEST_CASE("helper arm forward kinematics") {
  const Transform base = random_transform(0.5, 1.0);
  const HelperArm arm = build_helper_arm(4, 0.35, 1.0, base);
  CHECK(arm.dof() == 12);
  const Transform straight = arm.tip(Eigen::VectorXd::Zero(12));
  CHECK(max_abs_difference(straight, base * Transform::from_translation({0, 0, 1.4})) < 1e-12);

  const HelperArm single = build_helper_arm(1, 0.4);
  CHECK((single.tip(Eigen::VectorXd::Zero(3)).translation - Vec3(0, 0, 0.4)).norm() < 1e-15);

  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd q = random_angles(12, 1.0);
    CHECK(max_abs_difference(arm.tip(q), oracle_tip(base, 0.35, q)) < 1e-12);
  }
  CHECK_THROWS_AS(arm.tip(Eigen::VectorXd::Zero(11)), InvalidArgument);
  CHECK_THROWS_AS(build_helper_arm(0, 0.3), InvalidArgument);
  CHECK_THROWS_AS(build_helper_arm(3, -0.3), InvalidArgument);
}

TEST_CASE("helper arm jacobian matches finite differences") {
  const HelperArm arm = build_helper_arm(4, 0.39, 1.0);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd q = random_angles(12, 0.8);
    const auto jac = arm.jacobian(q);
    const Transform t0 = arm.tip(q);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < 12; ++j) {
      Eigen::VectorXd qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const Transform tp = oracle_tip(Transform::identity(), 0.39, qp);
      const Transform tm = oracle_tip(Transform::identity(), 0.39, qm);
      const Vec3 dp = (tp.translation - tm.translation) / (2 * h);
      // Angular velocity from the skew part of dR R^T.
      const Mat3 w = (tp.rotation - tm.rotation) / (2 * h) * t0.rotation.transpose();
      const Vec3 dw(w(2, 1), w(0, 2), w(1, 0));
      CHECK((jac.col(j).head<3>() - dp).norm() < 1e-7);
      CHECK((jac.col(j).tail<3>() - dw).norm() < 1e-7);
    }
  }
}

TEST_CASE("helper arm IK") {
  const HelperArm arm = build_helper_arm(4, 0.39, 0.6);
  SUBCASE("straight goal needs no motion") {
    const HelperIkResult r = helper_arm_ik(arm, Transform::from_translation({0, 0, 1.56}), Eigen::VectorXd::Zero(12));
    CHECK(r.converged);
    CHECK(r.angles.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.iterations == 0);
  }
  SUBCASE("unreachable goal fails") {
    const HelperIkResult r = helper_arm_ik(arm, Transform::from_translation({0, 0, 2.0}), Eigen::VectorXd::Zero(12));
    CHECK_FALSE(r.converged);
  }
  SUBCASE("reachable random goals converge within the joint limits") {
    int solved = 0;
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd q = random_angles(12, 0.4);
      const Transform goal = arm.tip(q);
      const HelperIkResult r = helper_arm_ik(arm, goal, Eigen::VectorXd::Zero(12));
      if (!r.converged) continue;
      ++solved;
      const Transform got = oracle_tip(Transform::identity(), 0.39, r.angles);
      CHECK((got.translation - goal.translation).norm() <= 1e-3);
      CHECK(rotation_distance(got.rotation, goal.rotation) <= 1e-2 + 1e-12);
      CHECK(r.angles.cwiseAbs().maxCoeff() <= 0.6);
    }
    CHECK(solved >= 18);
  }
}

TEST_CASE("plate placement") {
  const AssemblerStack stack = default_stack(4);
  const double d0 = stack.platforms[0].home_height;
  const HelperArm arm = build_helper_arm(4, d0, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(12);
  const StackPose straight = place_plates(arm, zero, arm.tip(zero));
  const StackPose home = home_pose(stack);
  for (std::size_t k = 0; k < 5; ++k) CHECK(max_abs_difference(straight.plates[k], home.plates[k]) < 1e-12);

  const Eigen::VectorXd q = random_angles(12, 0.4);
  const auto frames = arm.cluster_frames(q);
  const StackPose pose = place_plates(arm, q, arm.tip(q));
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK((pose.plates[k].translation - 0.5 * (frames[k - 1].translation + frames[k].translation)).norm() < 1e-12);
    const double full = rotation_distance(frames[k - 1].rotation, frames[k].rotation);
    CHECK(rotation_distance(frames[k - 1].rotation, pose.plates[k].rotation) == doctest::Approx(0.5 * full));
  }
  CHECK(max_abs_difference(pose.plates[4], arm.tip(q)) == 0.0);
}

TEST_CASE("link length scan order") {
  const double expected[] = {0.4, 0.42, 0.38, 0.44, 0.36, 0.46};
  for (int a = 0; a < 6; ++a) CHECK(scan_link_length(0.4, 0.02, a) == doctest::Approx(expected[a]).epsilon(1e-15));
}

TEST_CASE("initial condition") {
  const AssemblerStack stack = default_stack(4);
  const double d0 = stack.platforms[0].home_height;
  InitializerParams params;

  SUBCASE("home goal succeeds on the first attempt") {
    const InitResult r = initial_condition(stack, Transform::from_translation({0, 0, 4 * d0}), params);
    CHECK(r.feasible);
    CHECK(r.attempts == 1);
    CHECK(r.link_length == doctest::Approx(d0));
    CHECK(kinematic_margin(stack, r.pose) >= 0.0);
  }
  SUBCASE("goal beyond reach reports infeasible and returns home") {
    const InitResult r = initial_condition(stack, Transform::from_translation({0, 0, 4 * 0.55 + 0.1}), params);
    CHECK_FALSE(r.feasible);
    CHECK(r.attempts == params.recursion_limit);
    const StackPose home = home_pose(stack);
    for (std::size_t k = 0; k < 5; ++k) CHECK(max_abs_difference(r.pose.plates[k], home.plates[k]) == 0.0);
  }
  SUBCASE("lateral goal at home height with a swung seed") {
    params.seed = builtin_scenarios().front().helper_seed;
    const Transform goal = Transform::from_translation({0.8, 0, 4 * d0});
    const InitResult r = initial_condition(stack, goal, params);
    REQUIRE(r.feasible);
    CHECK(kinematic_margin(stack, r.pose) >= 0.0);
    CHECK((stack_fk(stack, r.pose).translation - goal.translation).norm() < 1e-3);
    CHECK((r.leg_matrix - stack_leg_matrix(stack, r.pose)).norm() == 0.0);
    const InitResult again = initial_condition(stack, goal, params);
    CHECK(again.link_length == r.link_length);
    for (std::size_t k = 0; k < 5; ++k) CHECK(max_abs_difference(again.pose.plates[k], r.pose.plates[k]) == 0.0);
  }
  SUBCASE("acceptor can veto every candidate") {
    params.recursion_limit = 3;
    int calls = 0;
    const InitResult r = initial_condition(stack, Transform::from_translation({0, 0, 4 * d0}), params,
                                           [&](const StackPose&) { return ++calls, false; });
    CHECK_FALSE(r.feasible);
    CHECK(calls >= 1);
    CHECK(r.attempts == 3);
  }
  SUBCASE("bad parameters") {
    params.d_step = 0.0;
    CHECK_THROWS_AS(initial_condition(stack, Transform::identity(), params), InvalidArgument);
    params = {};
    params.seed = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(initial_condition(stack, Transform::identity(), params), InvalidArgument);
  }
}
