#pragma once

#include <Eigen/Dense>

#include "mwvio/errors.h"

namespace mwvio {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// SO(3) element. The checked constructor enforces orthonormality and
// det = +1 within 1e-9; internal compositions skip the check.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}

  explicit Rotation(const Eigen::Matrix3d& m) : m_(m) {
    if (!is_rotation(m)) throw InvalidArgument("matrix is not a rotation");
  }

  static Rotation unchecked(const Eigen::Matrix3d& m) {
    Rotation r;
    r.m_ = m;
    return r;
  }

  static bool is_rotation(const Eigen::Matrix3d& m, double tol = 1e-9) {
    return (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(m.determinant() - 1.0) < tol;
  }

  static Rotation exp(const Eigen::Vector3d& w);
  Eigen::Vector3d log() const;

  static Rotation from_quaternion(const Eigen::Quaterniond& q) {
    return unchecked(q.normalized().toRotationMatrix());
  }
  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(m_); }

  const Eigen::Matrix3d& matrix() const { return m_; }
  Eigen::Vector3d col(int i) const { return m_.col(i); }

  Rotation inverse() const { return unchecked(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return unchecked(m_ * o.m_); }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }

 private:
  Eigen::Matrix3d m_;
};

Rotation so3_exp(const Eigen::Vector3d& w);
Eigen::Vector3d so3_log(const Rotation& r);

// Inverse of the right Jacobian of SO(3), used by relative-pose factors.
Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& w);

// Orthogonal polar factor with det +1. Throws SingularInput when any
// singular value is below 1e-12.
Rotation nearest_rotation(const Eigen::Matrix3d& m);

// arccos(clamp((trace - 1) / 2)), the geodesic angle of a rotation.
double rotation_angle(const Rotation& r);

}  // namespace mwvio
