#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace geosacs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

/// Unsigned angle between two non-zero vectors, in [0, pi].
inline double angle_between(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate near 0 and pi where acos loses digits.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Some unit vector orthogonal to `v` (v need not be unit).
inline Vec3 any_perpendicular(const Vec3& v) {
  const Vec3 a = v.cwiseAbs();
  Vec3 axis = Vec3::UnitX();
  if (a.y() <= a.x() && a.y() <= a.z()) axis = Vec3::UnitY();
  else if (a.z() <= a.x() && a.z() <= a.y()) axis = Vec3::UnitZ();
  return v.cross(axis).normalized();
}

inline double quat_dot(const Quat& a, const Quat& b) { return a.coeffs().dot(b.coeffs()); }

inline Quat negated(const Quat& q) { return Quat(-q.w(), -q.x(), -q.y(), -q.z()); }

/// Rotation distance in radians, sign-blind: 2 acos(|<a,b>|).
inline double geodesic_angle(const Quat& a, const Quat& b) {
  return 2.0 * std::acos(std::min(1.0, std::abs(quat_dot(a, b))));
}

/// Quaternion logarithm of a unit quaternion, returned as a rotation-vector/2.
inline Vec3 quat_log(const Quat& q) {
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-300) return Vec3::Zero();
  return v * (std::atan2(s, q.w()) / s);
}

inline Quat quat_exp(const Vec3& v) {
  const double a = v.norm();
  if (a < 1e-300) return Quat::Identity();
  const Vec3 axis = v / a;
  return Quat(std::cos(a), axis.x() * std::sin(a), axis.y() * std::sin(a), axis.z() * std::sin(a));
}

/// a * (a^-1 b)^u along the shorter arc. u outside [0,1] extrapolates.
inline Quat slerp(const Quat& a, const Quat& b, double u) {
  const Quat bb = quat_dot(a, b) < 0.0 ? negated(b) : b;
  Quat r = a * quat_exp(u * quat_log(a.conjugate() * bb));
  r.normalize();
  return r;
}

/// Flip signs so consecutive quaternions share a hemisphere.
inline void hemisphere_align(std::span<Quat> qs) {
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (quat_dot(qs[i - 1], qs[i]) < 0.0) qs[i] = negated(qs[i]);
  }
}

}  // namespace geosacs
