#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "assembler/initializer.hpp"
#include "assembler/platform.hpp"
#include "assembler/spatial.hpp"
#include "assembler/stack.hpp"

namespace testing {

using namespace assembler;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240521);
  return engine;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vec3 random_unit() {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng()), n(rng()), n(rng()));
  return v.normalized();
}

// Rotation through Eigen's own axis-angle type, independent of the library code.
inline Mat3 oracle_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline Transform random_transform(double max_angle = M_PI, double max_offset = 2.0) {
  Transform t;
  t.rotation = oracle_rotation(random_unit(), uniform(0.0, max_angle));
  t.translation = Vec3(uniform(-max_offset, max_offset), uniform(-max_offset, max_offset),
                       uniform(-max_offset, max_offset));
  return t;
}

// Legs vertical at home: every top anchor sits directly above its bottom anchor.
inline PlatformGeometry paired_geometry(double height = 0.4) {
  PlatformGeometry g;
  for (int i = 0; i < 6; ++i) {
    const double a = i * M_PI / 3.0;
    g.bottom_anchors[i] = Vec3(0.15 * std::cos(a), 0.15 * std::sin(a), 0.0);
    g.top_anchors[i] = g.bottom_anchors[i];
  }
  g.leg_min = height - 0.15;
  g.leg_max = height + 0.15;
  g.home_height = height;
  return g;
}

// Random pose produced by placing plates along a randomly bent helper arm,
// kept only when it satisfies the kinematic limits with some margin.
inline StackPose random_stack_pose(const AssemblerStack& stack, double max_angle = 0.25, double min_margin = 1e-3) {
  const std::size_t n = stack.size();
  const double d0 = stack.platforms.front().home_height;
  for (;;) {
    const HelperArm arm = build_helper_arm(n, d0 * uniform(0.9, 1.1), M_PI, stack.base);
    Eigen::VectorXd angles(static_cast<Eigen::Index>(3 * n));
    for (Eigen::Index i = 0; i < angles.size(); ++i) angles[i] = uniform(-max_angle, max_angle);
    const StackPose pose = place_plates(arm, angles, arm.tip(angles));
    if (kinematic_margin(stack, pose) >= min_margin) return pose;
  }
}

// "-12.840" -> "-12.84", "5.000" -> "5". Lets rendered cells be compared
// with values that were written without padding.
inline std::string trim_zeros(std::string cell) {
  if (cell.find('.') == std::string::npos) return cell;
  while (cell.back() == '0') cell.pop_back();
  if (cell.back() == '.') cell.pop_back();
  return cell;
}

// Cell-by-cell comparison of two CSV texts, ignoring trailing zeros.
inline bool same_table_text(const std::string& a, const std::string& b) {
  std::istringstream ia(a), ib(b);
  std::string la, lb;
  for (;;) {
    const bool more_a = static_cast<bool>(std::getline(ia, la));
    const bool more_b = static_cast<bool>(std::getline(ib, lb));
    if (more_a != more_b) return false;
    if (!more_a) return true;
    std::istringstream ca(la), cb(lb);
    std::string xa, xb;
    for (;;) {
      const bool ha = static_cast<bool>(std::getline(ca, xa, ','));
      const bool hb = static_cast<bool>(std::getline(cb, xb, ','));
      if (ha != hb) return false;
      if (!ha) break;
      if (trim_zeros(xa) != trim_zeros(xb)) return false;
    }
  }
}

}  // namespace testing
