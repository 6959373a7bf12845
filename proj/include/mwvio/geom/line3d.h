#pragma once

#include <Eigen/Dense>

#include "mwvio/geom/transform.h"

namespace mwvio {

// Plane a*x + b*y + c*z + d = 0 with (a,b,c) kept at unit norm.
struct Plane {
  Eigen::Vector4d coeffs{0, 0, 1, 0};

  Plane() = default;
  explicit Plane(const Eigen::Vector4d& c);
  static Plane from_point_normal(const Eigen::Vector3d& p, const Eigen::Vector3d& n);
  // Plane through three points (e.g. a camera center and two ray endpoints).
  static Plane through_points(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                              const Eigen::Vector3d& c);

  Eigen::Vector3d normal() const { return coeffs.head<3>(); }
  double signed_distance(const Eigen::Vector3d& p) const {
    return coeffs.head<3>().dot(p) + coeffs[3];
  }
};

// 3D line as moment/direction pair with n . d = 0. Stored unnormalized;
// normalization happens only at conversion boundaries.
struct PluckerLine {
  Eigen::Vector3d n{0, 0, 0};  // moment
  Eigen::Vector3d d{0, 0, 1};  // direction

  PluckerLine() = default;
  PluckerLine(const Eigen::Vector3d& n_, const Eigen::Vector3d& d_);

  static PluckerLine through_points(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    Eigen::Vector3d dir = b - a;
    return PluckerLine(a.cross(dir), dir);
  }

  // closest point of the line to the origin
  Eigen::Vector3d closest_point() const { return d.cross(n) / d.squaredNorm(); }
  double distance_to_point(const Eigen::Vector3d& p) const {
    return (p.cross(d) - n).norm() / d.norm();
  }
};

// Minimal 4-DOF line parameterization: a frame [n/|n|, d/|d|, n x d/|n x d|]
// plus the line-to-origin distance |n|/|d|.
struct OrthonormalLine {
  Rotation psi;
  double phi = 1.0;

  OrthonormalLine() = default;
  OrthonormalLine(const Rotation& psi_, double phi_);
};

// Degeneracy thresholds used across the line geometry operations.
constexpr double kPlaneParallelTol = 1e-6;  // rad between plane normals
constexpr double kTinyNorm = 1e-12;

PluckerLine plucker_from_planes(const Plane& p1, const Plane& p2);
PluckerLine plucker_transform(const RigidTransform& T, const PluckerLine& L);

OrthonormalLine plucker_to_orthonormal(const PluckerLine& L);
PluckerLine orthonormal_to_plucker(const OrthonormalLine& o);

// psi <- psi * exp(delta[0:3]); phi <- phi * exp(delta[3])
OrthonormalLine orthonormal_retract(const OrthonormalLine& o, const Eigen::Vector4d& delta);
Eigen::Vector4d orthonormal_boxminus(const OrthonormalLine& o, const OrthonormalLine& ref);

// Image-plane line coefficients of a camera-frame line. Observations live in
// normalized coordinates, so the projection matrix is the identity.
inline Eigen::Vector3d project_line(const Eigen::Vector3d& n_c) { return n_c; }

}  // namespace mwvio
