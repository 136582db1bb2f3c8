#pragma once

#include <array>

#include "assembler/spatial.hpp"

namespace assembler {

using LegVector = Vec6;
using AnchorSet = std::array<Vec3, 6>;

// One Stewart platform. Leg i runs from bottom_anchors[i] (bottom plate frame)
// to top_anchors[i] (top plate frame).
struct PlatformGeometry {
  AnchorSet bottom_anchors{};
  AnchorSet top_anchors{};
  double leg_min = 0.25;
  double leg_max = 0.55;
  double theta_max = 0.5235987755982988;  // 30 deg
  double home_height = 0.0;
  double motor_mass = 0.1;
  double shaft_mass = 0.04;
  double plate_mass = 0.2;

  double leg_mid() const { return 0.5 * (leg_min + leg_max); }
  Transform home_top() const { return Transform::from_translation({0.0, 0.0, home_height}); }
};

// Parametric 6-6 layout: three anchor clusters per plate, each cluster holding
// two anchors at +/- half_spread around the cluster angle. The top pattern is
// rotated by top_rotation so consecutive legs alternate between clusters.
struct PlatformLayout {
  double bottom_radius = 0.15;
  double top_radius = 0.15;
  double half_spread = 0.20943951023931956;   // 12 deg
  double top_rotation = 1.0471975511965976;   // 60 deg
  double leg_min = 0.25;
  double leg_max = 0.55;
  double theta_max = 0.5235987755982988;
  double motor_mass = 0.1;
  double shaft_mass = 0.04;
  double plate_mass = 0.2;
};

PlatformGeometry make_platform(const PlatformLayout& layout);
PlatformGeometry default_platform();

// Height at which every leg equals leg_mid() with zero relative rotation.
// Throws InvalidArgument when no such height exists or legs disagree.
double solve_home_height(const AnchorSet& bottom, const AnchorSet& top, double leg_length);

// Throws InvalidArgument describing the first violated geometry invariant.
void validate(const PlatformGeometry& geometry);

struct PlatformState {
  Transform bottom;
  Transform top;
};

struct AnchorPositions {
  AnchorSet top;
  AnchorSet bottom;
};

AnchorPositions anchor_positions_global(const PlatformGeometry& geometry, const PlatformState& state);

LegVector ik_leg_lengths(const PlatformGeometry& geometry, const PlatformState& state);

// Angle between each leg's current direction and its home direction, the home
// direction being taken relative to the current bottom plate.
LegVector deviation_angles(const PlatformGeometry& geometry, const PlatformState& state);

// Largest rotation of the top plate about its own x, y and z axes, starting
// from the home pose and in both directions, that keeps every leg within its
// length bounds and deviation limit.
Vec3 top_plate_rotation_limits(const PlatformGeometry& geometry);

struct FkOptions {
  double jacobian_step = 1e-7;
  double damping = 1e-6;
  int max_iterations = 200;
  double residual_tolerance = 1e-8;
};

// Numerical forward kinematics (damped Gauss-Newton over the top plate's TAA
// coordinates). Throws ConvergenceFailure carrying the final residual norm.
Transform fk_numeric(const PlatformGeometry& geometry, const Transform& bottom, const LegVector& legs,
                     const Transform& guess, const FkOptions& options = {});

}  // namespace assembler
