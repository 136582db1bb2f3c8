#include "assembler/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "assembler/error.hpp"

namespace assembler {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Flip so the first component with magnitude above `eps` is positive.
Vec3 canonical_sign(const Vec3& axis, double eps = 1e-12) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis[i]) > eps) return axis[i] < 0.0 ? Vec3(-axis) : axis;
  }
  return axis;
}

}  // namespace

Transform Transform::inverse() const {
  Transform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Transform operator*(const Transform& a, const Transform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Vec6 TaaPose::as_vector() const {
  Vec6 v;
  v << translation, rotation;
  return v;
}

TaaPose TaaPose::from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

bool all_finite(const Vec3& v) { return v.allFinite(); }

Mat3 rotation_from_axis_angle(const Vec3& r) {
  if (!r.allFinite()) throw InvalidArgument("axis-angle vector has non-finite components");
  const double angle = r.norm();
  if (angle < 1e-300) return Mat3::Identity();
  const Mat3 k = skew(r / angle);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Vec3 axis_angle_from_rotation(const Mat3& rotation) {
  const Vec3 w(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
               rotation(1, 0) - rotation(0, 1));
  const double sin_2 = w.norm();  // 2 sin(angle)
  const double cos_2 = rotation.trace() - 1.0;  // 2 cos(angle)
  const double angle = std::atan2(sin_2, cos_2);

  if (angle < 1e-6) {
    // angle / (2 sin angle) ~ 1/2 + angle^2 / 12
    return (0.5 + angle * angle / 12.0) * w;
  }
  if (angle < std::numbers::pi - 1e-4) return angle / sin_2 * w;

  // Near pi the skew part vanishes; recover the axis from the symmetric part,
  // (R + R^T)/2 - cos(angle) I = (1 - cos(angle)) k k^T.
  const double c = 0.5 * cos_2;
  const Mat3 sym = 0.5 * (rotation + rotation.transpose()) - c * Mat3::Identity();
  int col = 0;
  sym.diagonal().maxCoeff(&col);
  Vec3 axis = sym.col(col).normalized();
  if (axis.dot(w) < 0.0) axis = -axis;
  if (sin_2 < 1e-12) axis = canonical_sign(axis);
  return angle * axis;
}

Transform transform_from_taa(const TaaPose& pose) {
  if (!pose.translation.allFinite()) throw InvalidArgument("translation has non-finite components");
  return {rotation_from_axis_angle(pose.rotation), pose.translation};
}

TaaPose taa_from_transform(const Transform& t) {
  return {t.translation, axis_angle_from_rotation(t.rotation)};
}

Mat3 interpolate_rotation(const Mat3& from, const Mat3& to, double fraction) {
  const Vec3 rel = axis_angle_from_rotation(from.transpose() * to);
  return from * rotation_from_axis_angle(fraction * rel);
}

double rotation_distance(const Mat3& a, const Mat3& b) {
  return axis_angle_from_rotation(a.transpose() * b).norm();
}

double max_abs_difference(const Transform& a, const Transform& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace assembler
