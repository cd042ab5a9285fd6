#include "pointfuse/geometry.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace pointfuse {

Rotation3 Rotation3::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw InvariantViolationError("rotation matrix has non-finite entries");
  }
  const Eigen::Matrix3d gram = m.transpose() * m;
  const double ortho_err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kRotationTolerance) {
    throw InvariantViolationError("rotation matrix is not orthonormal");
  }
  if (std::abs(m.determinant() - 1.0) > kRotationTolerance) {
    throw InvariantViolationError("rotation matrix determinant is not +1");
  }
  return Rotation3(m, unchecked_t{});
}

Rotation3 Rotation3::nearest(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw InvariantViolationError("cannot project a non-finite matrix onto a rotation");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return Rotation3(r, unchecked_t{});
}

Rotation3 Rotation3::axis_angle(const Point3& axis, double radians) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(radians)) {
    throw InvariantViolationError("axis-angle rotation needs a nonzero finite axis and angle");
  }
  const Eigen::AngleAxisd aa(radians, axis / n);
  return Rotation3(aa.toRotationMatrix(), unchecked_t{});
}

Quaternion Quaternion::canonical() const {
  if (w > 0.0) return *this;
  if (w < 0.0) return negated();
  if (x != 0.0) return x > 0.0 ? *this : negated();
  if (y != 0.0) return y > 0.0 ? *this : negated();
  if (z != 0.0) return z > 0.0 ? *this : negated();
  return *this;
}

double quat_angle(const Quaternion& q1, const Quaternion& q2) {
  const double n1 = q1.norm();
  const double n2 = q2.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0) || !std::isfinite(n1) || !std::isfinite(n2)) {
    throw InvariantViolationError("quat_angle needs nonzero finite quaternions");
  }
  // 2 * arccos(|q1 . q2| / (n1 n2)) evaluated through the chordal distance
  // d = 2 sin(theta/4) between the sign-matched unit quaternions. The two
  // forms are identical in exact arithmetic, but this one returns exactly 0
  // for coincident or antipodal inputs, where arccos loses half the
  // significant digits to rounding in the dot product.
  const auto diff_norm = [&](double sign) {
    const double dw = q1.w / n1 - sign * q2.w / n2;
    const double dx = q1.x / n1 - sign * q2.x / n2;
    const double dy = q1.y / n1 - sign * q2.y / n2;
    const double dz = q1.z / n1 - sign * q2.z / n2;
    return std::sqrt(dw * dw + dx * dx + dy * dy + dz * dz);
  };
  const double d = std::min(diff_norm(1.0), diff_norm(-1.0));
  return 4.0 * std::asin(std::min(d / 2.0, 1.0));
}

Quaternion quat_from_rotation(const Rotation3& r) {
  const Eigen::Quaterniond q(r.matrix());
  return Quaternion{q.w(), q.x(), q.y(), q.z()}.canonical();
}

Rotation3 rotation_from_quat(const Quaternion& q) {
  if (std::abs(q.norm() - 1.0) > kRotationTolerance) {
    throw InvariantViolationError("quaternion is not unit length");
  }
  const Eigen::Quaterniond eq(q.w, q.x, q.y, q.z);
  return Rotation3::from_matrix(eq.normalized().toRotationMatrix());
}

SimTransform compose_sim3(const SimTransform& a, const SimTransform& b) {
  SimTransform out;
  out.scale = a.scale * b.scale;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return out;
}

SimTransform invert_sim3(const SimTransform& t) {
  if (!(t.scale > 0.0) || !std::isfinite(t.scale)) {
    throw InvariantViolationError("similarity scale must be positive and finite");
  }
  SimTransform out;
  out.scale = 1.0 / t.scale;
  out.rotation = t.rotation.transposed();
  out.translation = -(out.scale) * (out.rotation * t.translation);
  return out;
}

}  // namespace pointfuse
