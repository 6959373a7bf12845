#include "mwvio/geom/rotation.h"

#include <cmath>

namespace mwvio {

Rotation Rotation::exp(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Eigen::Matrix3d s = skew(w);
  double a, b;
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return unchecked(Eigen::Matrix3d::Identity() + a * s + b * s * s);
}

Eigen::Vector3d Rotation::log() const {
  const Eigen::Matrix3d& m = m_;
  const Eigen::Vector3d v(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double c = std::clamp((m.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double s = 0.5 * v.norm();
  const double theta = std::atan2(s, c);
  if (c > 0.999999) {
    // small angle: v = 2 sin(theta) * axis, sin(theta)/theta ~ 1
    return 0.5 * (1.0 + theta * theta / 6.0) * v;
  }
  if (c > -0.999999) {
    return theta / (2.0 * std::sin(theta)) * v;
  }
  // near pi: axis from the largest diagonal entry of (m + I)
  Eigen::Matrix3d b = 0.5 * (m + Eigen::Matrix3d::Identity());
  int k = 0;
  b.diagonal().maxCoeff(&k);
  Eigen::Vector3d axis;
  axis[k] = std::sqrt(std::max(b(k, k), 0.0));
  for (int i = 0; i < 3; ++i)
    if (i != k) axis[i] = b(k, i) / axis[k];
  axis.normalize();
  // fix sign with the off-diagonal skew part (vanishes exactly at pi)
  if (v.dot(axis) < 0) axis = -axis;
  return theta * axis;
}

Rotation so3_exp(const Eigen::Vector3d& w) { return Rotation::exp(w); }

Eigen::Vector3d so3_log(const Rotation& r) { return r.log(); }

Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Eigen::Matrix3d s = skew(w);
  if (theta < 1e-6) {
    return Eigen::Matrix3d::Identity() + 0.5 * s + (1.0 / 12.0) * s * s;
  }
  const double c = (1.0 / theta2) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Eigen::Matrix3d::Identity() + 0.5 * s + c * s * s;
}

Rotation nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-12) {
    throw SingularInput("nearest_rotation: singular input matrix");
  }
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d diag(1.0, 1.0, (u * v.transpose()).determinant() > 0 ? 1.0 : -1.0);
  return Rotation::unchecked(u * diag.asDiagonal() * v.transpose());
}

double rotation_angle(const Rotation& r) {
  return std::acos(std::clamp((r.matrix().trace() - 1.0) * 0.5, -1.0, 1.0));
}

}  // namespace mwvio
