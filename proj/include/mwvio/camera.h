#pragma once

#include <Eigen/Dense>

namespace mwvio {

// Pinhole intrinsics. The default is the identity camera, i.e. observations
// already expressed in normalized image coordinates.
struct CameraIntrinsics {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;

  Eigen::Vector2d normalize(const Eigen::Vector2d& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy};
  }
  Eigen::Vector2d to_pixels(const Eigen::Vector2d& nc) const {
    return {nc.x() * fx + cx, nc.y() * fy + cy};
  }
  Eigen::Vector3d unproject(const Eigen::Vector2d& px) const {
    const Eigen::Vector2d n = normalize(px);
    return {n.x(), n.y(), 1.0};
  }
};

}  // namespace mwvio
