#pragma once

#include <cmath>

#include <Eigen/Core>

#include "pointfuse/errors.hpp"

namespace pointfuse {

using Point3 = Eigen::Vector3d;

/// Tolerance for the rotation invariants: |R^T R - I| and |det(R) - 1|.
inline constexpr double kRotationTolerance = 1e-9;

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// A proper rotation: orthonormal within 1e-9, det(R) = +1 within 1e-9.
///
/// Checked constructors (`from_matrix`) validate; arithmetic between valid
/// rotations never re-orthonormalizes. Use `nearest` to project an almost-
/// orthonormal matrix back onto SO(3) at I/O boundaries.
class Rotation3 {
 public:
  Rotation3() : m_(Eigen::Matrix3d::Identity()) {}

  /// Validates the invariants; throws InvariantViolationError.
  static Rotation3 from_matrix(const Eigen::Matrix3d& m);

  /// Nearest proper rotation in the Frobenius sense (SVD projection).
  static Rotation3 nearest(const Eigen::Matrix3d& m);

  /// Rotation of `radians` about `axis` (need not be unit length).
  static Rotation3 axis_angle(const Point3& axis, double radians);

  static Rotation3 identity() { return Rotation3(); }

  const Eigen::Matrix3d& matrix() const { return m_; }

  Point3 operator*(const Point3& p) const { return m_ * p; }
  Rotation3 operator*(const Rotation3& o) const {
    return Rotation3(Eigen::Matrix3d(m_ * o.m_), unchecked_t{});
  }
  Rotation3 transposed() const {
    return Rotation3(Eigen::Matrix3d(m_.transpose()), unchecked_t{});
  }

  Point3 col(int j) const { return m_.col(j); }

 private:
  struct unchecked_t {};
  Rotation3(const Eigen::Matrix3d& m, unchecked_t) : m_(m) {}

  Eigen::Matrix3d m_;
};

/// Unit quaternion (w, x, y, z), norm 1 within 1e-9.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  double dot(const Quaternion& o) const {
    return w * o.w + x * o.x + y * o.y + z * o.z;
  }
  Quaternion negated() const { return {-w, -x, -y, -z}; }

  /// Sign-canonical form: w >= 0; if w == 0, first nonzero of (x,y,z) > 0.
  Quaternion canonical() const;
};

/// Angular difference of the rotations represented by two quaternions:
///   2 * arccos(|q1 . q2| / (|q1| |q2|)),  in [0, pi].
/// Evaluated in a form that is exact at coincident and antipodal inputs.
double quat_angle(const Quaternion& q1, const Quaternion& q2);

/// Rotation matrix -> sign-canonical unit quaternion.
Quaternion quat_from_rotation(const Rotation3& r);

/// Unit quaternion -> rotation matrix. Throws InvariantViolationError if
/// the norm is off by more than 1e-9.
Rotation3 rotation_from_quat(const Quaternion& q);

/// Similarity transform p -> s * (R * p) + t, with s > 0.
struct SimTransform {
  double scale = 1.0;
  Rotation3 rotation;
  Point3 translation = Point3::Zero();

  static SimTransform identity() { return {}; }
};

/// Applies T to p: scale first, then rotation, then translation offset,
/// i.e. s * (R * p) + t.
inline Point3 apply_sim3(const SimTransform& t, const Point3& p) {
  return t.scale * (t.rotation * p) + t.translation;
}

/// Composition: apply_sim3(compose_sim3(a, b), p) == apply_sim3(a, apply_sim3(b, p)).
SimTransform compose_sim3(const SimTransform& a, const SimTransform& b);

SimTransform invert_sim3(const SimTransform& t);

}  // namespace pointfuse
