#pragma once

#include <Eigen/Dense>

#include "mwvio/geom/rotation.h"

namespace mwvio {

struct RigidTransform {
  Rotation r;
  Eigen::Vector3d t{0.0, 0.0, 0.0};

  RigidTransform() = default;
  RigidTransform(const Rotation& r_, const Eigen::Vector3d& t_) : r(r_), t(t_) {}

  RigidTransform inverse() const {
    Rotation ri = r.inverse();
    return {ri, -(ri * t)};
  }

  RigidTransform operator*(const RigidTransform& o) const { return {r * o.r, r * o.t + t}; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return r * p + t; }
};

// Tangent update used everywhere a pose is optimized: rotation updated on the
// right, translation additively. Tangent ordering is (rotation, translation).
inline RigidTransform pose_retract(const RigidTransform& T, const Eigen::Matrix<double, 6, 1>& d) {
  return {T.r * Rotation::exp(d.head<3>()), T.t + d.tail<3>()};
}

inline Eigen::Matrix<double, 6, 1> pose_boxminus(const RigidTransform& T,
                                                 const RigidTransform& ref) {
  Eigen::Matrix<double, 6, 1> d;
  d.head<3>() = (ref.r.inverse() * T.r).log();
  d.tail<3>() = T.t - ref.t;
  return d;
}

}  // namespace mwvio
