#include "assembler/platform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "assembler/error.hpp"

namespace assembler {

namespace {

Vec3 on_circle(double radius, double angle) {
  return {radius * std::cos(angle), radius * std::sin(angle), 0.0};
}

}  // namespace

PlatformGeometry make_platform(const PlatformLayout& layout) {
  constexpr double kCluster = 2.0 * std::numbers::pi / 3.0;
  PlatformGeometry g;
  // Leg 2c+1 leaves bottom cluster c at +spread and lands on the neighbouring
  // top anchor; leg 2c+2 leaves cluster c+1 at -spread towards the same top cluster.
  for (int c = 0; c < 3; ++c) {
    const double bottom_a = c * kCluster + layout.half_spread;
    const double bottom_b = (c + 1) * kCluster - layout.half_spread;
    const double top_center = c * kCluster + layout.top_rotation;
    g.bottom_anchors[2 * c] = on_circle(layout.bottom_radius, bottom_a);
    g.top_anchors[2 * c] = on_circle(layout.top_radius, top_center - layout.half_spread);
    g.bottom_anchors[2 * c + 1] = on_circle(layout.bottom_radius, bottom_b);
    g.top_anchors[2 * c + 1] = on_circle(layout.top_radius, top_center + layout.half_spread);
  }
  g.leg_min = layout.leg_min;
  g.leg_max = layout.leg_max;
  g.theta_max = layout.theta_max;
  g.motor_mass = layout.motor_mass;
  g.shaft_mass = layout.shaft_mass;
  g.plate_mass = layout.plate_mass;
  g.home_height = solve_home_height(g.bottom_anchors, g.top_anchors, g.leg_mid());
  validate(g);
  return g;
}

PlatformGeometry default_platform() { return make_platform(PlatformLayout{}); }

double solve_home_height(const AnchorSet& bottom, const AnchorSet& top, double leg_length) {
  // With zero relative rotation every leg has length sqrt(h^2 + r_i^2), r_i the
  // planar offset of its anchors, so the mean squared length is monotone in h.
  auto mean_sq = [&](double h) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += (top[i] + Vec3(0, 0, h) - bottom[i]).squaredNorm();
    return s / 6.0;
  };
  const double target = leg_length * leg_length;
  double lo = 0.0;
  double hi = leg_length + 1.0;
  for (const auto& p : top) hi = std::max(hi, std::abs(p.z()) + leg_length + 1.0);
  for (const auto& p : bottom) hi = std::max(hi, std::abs(p.z()) + leg_length + 1.0);
  if (mean_sq(lo) > target) {
    throw InvalidArgument("anchor offsets exceed the home leg length; no home height exists");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_sq(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void validate(const PlatformGeometry& g) {
  std::ostringstream why;
  if (!(g.leg_min > 0.0 && g.leg_min < g.leg_max)) {
    why << "leg limits must satisfy 0 < leg_min < leg_max (got " << g.leg_min << ", " << g.leg_max << ")";
  } else if (!(g.theta_max > 0.0 && g.theta_max < 0.5 * std::numbers::pi)) {
    why << "theta_max must lie in (0, pi/2) (got " << g.theta_max << ")";
  } else if (!(g.home_height > 0.0)) {
    why << "home_height must be positive (got " << g.home_height << ")";
  } else if (g.motor_mass < 0.0 || g.shaft_mass < 0.0 || g.plate_mass < 0.0) {
    why << "masses must be non-negative";
  } else {
    const LegVector home = ik_leg_lengths(g, {Transform::identity(), g.home_top()});
    const double err = (home.array() - g.leg_mid()).abs().maxCoeff();
    if (err > 1e-9) {
      why << "home pose leg lengths deviate from (leg_min+leg_max)/2 by " << err;
    }
  }
  if (!why.str().empty()) throw InvalidArgument(why.str());
}

AnchorPositions anchor_positions_global(const PlatformGeometry& geometry, const PlatformState& state) {
  AnchorPositions out;
  for (int i = 0; i < 6; ++i) {
    out.top[i] = state.top.apply(geometry.top_anchors[i]);
    out.bottom[i] = state.bottom.apply(geometry.bottom_anchors[i]);
  }
  return out;
}

LegVector ik_leg_lengths(const PlatformGeometry& geometry, const PlatformState& state) {
  const AnchorPositions a = anchor_positions_global(geometry, state);
  LegVector legs;
  for (int i = 0; i < 6; ++i) legs[i] = (a.top[i] - a.bottom[i]).norm();
  return legs;
}

LegVector deviation_angles(const PlatformGeometry& geometry, const PlatformState& state) {
  const AnchorPositions a = anchor_positions_global(geometry, state);
  LegVector angles;
  for (int i = 0; i < 6; ++i) {
    const Vec3 leg = a.top[i] - a.bottom[i];
    const double len = leg.norm();
    if (len < 1e-12) {
      throw DegenerateConfiguration("leg " + std::to_string(i + 1) + " has zero length");
    }
    const Vec3 home_leg =
        state.bottom.rotation * (geometry.home_top().apply(geometry.top_anchors[i]) - geometry.bottom_anchors[i]);
    angles[i] = std::atan2(leg.cross(home_leg).norm(), leg.dot(home_leg));
  }
  return angles;
}

Vec3 top_plate_rotation_limits(const PlatformGeometry& geometry) {
  auto admissible = [&](int axis, double angle) {
    for (const double sign : {1.0, -1.0}) {
      Vec3 r = Vec3::Zero();
      r[axis] = sign * angle;
      Transform top = geometry.home_top();
      top.rotation = rotation_from_axis_angle(r);
      const PlatformState state{Transform::identity(), top};
      const LegVector legs = ik_leg_lengths(geometry, state);
      if (legs.minCoeff() < geometry.leg_min || legs.maxCoeff() > geometry.leg_max) return false;
      if (deviation_angles(geometry, state).maxCoeff() > geometry.theta_max) return false;
    }
    return true;
  };

  constexpr double kCoarse = 0.5 * std::numbers::pi / 180.0;
  constexpr double kCeiling = 0.5 * std::numbers::pi;
  Vec3 limits;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = 0.0;
    while (lo + kCoarse <= kCeiling && admissible(axis, lo + kCoarse)) lo += kCoarse;
    double hi = std::min(lo + kCoarse, kCeiling);
    if (admissible(axis, hi)) {
      limits[axis] = hi;
      continue;
    }
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (admissible(axis, mid) ? lo : hi) = mid;
    }
    limits[axis] = lo;
  }
  return limits;
}

Transform fk_numeric(const PlatformGeometry& geometry, const Transform& bottom, const LegVector& legs,
                     const Transform& guess, const FkOptions& options) {
  auto residual = [&](const Vec6& taa) {
    return LegVector(ik_leg_lengths(geometry, {bottom, transform_from_taa(TaaPose::from_vector(taa))}) - legs);
  };

  Vec6 x = taa_from_transform(guess).as_vector();
  LegVector r = residual(x);
  for (int it = 0; it < options.max_iterations && r.norm() > 1e-14; ++it) {
    Eigen::Matrix<double, 6, 6> jac;
    for (int j = 0; j < 6; ++j) {
      Vec6 step = Vec6::Zero();
      step[j] = options.jacobian_step;
      jac.col(j) = (residual(x + step) - residual(x - step)) / (2.0 * options.jacobian_step);
    }
    const Eigen::Matrix<double, 6, 6> normal =
        jac.transpose() * jac + options.damping * Eigen::Matrix<double, 6, 6>::Identity();
    const Vec6 dx = normal.ldlt().solve(-jac.transpose() * r);
    if (!dx.allFinite()) break;
    x += dx;
    // Keep the rotation part canonical so it cannot wander past pi.
    x = taa_from_transform(transform_from_taa(TaaPose::from_vector(x))).as_vector();
    r = residual(x);
    if (dx.norm() < 1e-15) break;
  }
  if (!(r.norm() <= options.residual_tolerance)) {
    throw ConvergenceFailure("forward kinematics did not converge (residual " + std::to_string(r.norm()) + ")",
                             r.norm());
  }
  return transform_from_taa(TaaPose::from_vector(x));
}

}  // namespace assembler
