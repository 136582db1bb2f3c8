#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace assembler {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Rigid transform stored in matrix form: x' = rotation * x + translation.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform from_translation(const Vec3& p) { return {Mat3::Identity(), p}; }

  Vec3 apply(const Vec3& point) const { return rotation * point + translation; }
  Transform inverse() const;
  Eigen::Matrix4d matrix() const;

  Vec3 x_axis() const { return rotation.col(0); }
  Vec3 y_axis() const { return rotation.col(1); }
  Vec3 z_axis() const { return rotation.col(2); }
};

Transform operator*(const Transform& a, const Transform& b);

// Translation + axis-angle rotation (6 numbers). Rotation magnitude is the
// angle in radians, direction is the unit axis.
struct TaaPose {
  Vec3 translation = Vec3::Zero();
  Vec3 rotation = Vec3::Zero();

  Vec6 as_vector() const;
  static TaaPose from_vector(const Vec6& v);
};

Mat3 rotation_from_axis_angle(const Vec3& r);

// Canonical axis-angle with angle in [0, pi]. At exactly pi the axis whose
// first nonzero component is positive is chosen.
Vec3 axis_angle_from_rotation(const Mat3& rotation);

Transform transform_from_taa(const TaaPose& pose);
TaaPose taa_from_transform(const Transform& t);

// Geodesic interpolation between two orientations; fraction 0 gives `from`.
Mat3 interpolate_rotation(const Mat3& from, const Mat3& to, double fraction);

// Angle of the relative rotation between a and b (radians, [0, pi]).
double rotation_distance(const Mat3& a, const Mat3& b);

// Largest elementwise deviation between two transforms' 3x4 blocks.
double max_abs_difference(const Transform& a, const Transform& b);

bool is_rotation(const Mat3& r, double tol = 1e-9);
bool all_finite(const Vec3& v);

}  // namespace assembler
