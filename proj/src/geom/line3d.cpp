#include "mwvio/geom/line3d.h"

#include <cmath>

namespace mwvio {

Plane::Plane(const Eigen::Vector4d& c) {
  const double nn = c.head<3>().norm();
  if (nn < kTinyNorm) throw InvalidArgument("plane normal has zero norm");
  coeffs = c / nn;
}

Plane Plane::from_point_normal(const Eigen::Vector3d& p, const Eigen::Vector3d& n) {
  const double nn = n.norm();
  if (nn < kTinyNorm) throw InvalidArgument("plane normal has zero norm");
  Eigen::Vector4d c;
  c.head<3>() = n / nn;
  c[3] = -c.head<3>().dot(p);
  return Plane(c);
}

Plane Plane::through_points(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const Eigen::Vector3d& c) {
  return from_point_normal(a, (b - a).cross(c - a));
}

PluckerLine::PluckerLine(const Eigen::Vector3d& n_, const Eigen::Vector3d& d_) : n(n_), d(d_) {
  if (d.norm() < kTinyNorm) throw InvalidArgument("plucker direction has zero norm");
  if (std::abs(n.dot(d)) > 1e-9 * std::max(1.0, n.norm() * d.norm()))
    throw InvalidArgument("plucker constraint n . d = 0 violated");
}

OrthonormalLine::OrthonormalLine(const Rotation& psi_, double phi_) : psi(psi_), phi(phi_) {
  if (phi < 0.0) throw InvalidArgument("orthonormal line distance must be nonnegative");
}

PluckerLine plucker_from_planes(const Plane& p1, const Plane& p2) {
  const Eigen::Vector3d n1 = p1.normal();
  const Eigen::Vector3d n2 = p2.normal();
  if (n1.cross(n2).norm() < kPlaneParallelTol) {
    throw DegeneratePlanes("plucker_from_planes: plane normals are parallel");
  }
  const Eigen::Matrix4d lstar =
      p1.coeffs * p2.coeffs.transpose() - p2.coeffs * p1.coeffs.transpose();
  // lstar = [ [d]x  n ; -n^T 0 ]
  Eigen::Vector3d d(lstar(2, 1), lstar(0, 2), lstar(1, 0));
  Eigen::Vector3d n = lstar.topRightCorner<3, 1>();
  return PluckerLine(n, d);
}

PluckerLine plucker_transform(const RigidTransform& T, const PluckerLine& L) {
  const Eigen::Vector3d d = T.r * L.d;
  const Eigen::Vector3d n = T.r * L.n + T.t.cross(d);
  PluckerLine out;
  out.n = n;
  out.d = d;
  return out;
}

OrthonormalLine plucker_to_orthonormal(const PluckerLine& L) {
  const double nn = L.n.norm();
  const double dn = L.d.norm();
  if (nn < kTinyNorm) throw LineThroughOrigin("plucker_to_orthonormal: line passes through origin");
  if (dn < kTinyNorm) throw InvalidArgument("plucker_to_orthonormal: zero direction");
  Eigen::Matrix3d psi;
  psi.col(0) = L.n / nn;
  psi.col(1) = L.d / dn;
  psi.col(2) = psi.col(0).cross(psi.col(1));
  return OrthonormalLine(Rotation::unchecked(psi), nn / dn);
}

PluckerLine orthonormal_to_plucker(const OrthonormalLine& o) {
  PluckerLine out;
  out.n = o.phi * o.psi.col(0);
  out.d = o.psi.col(1);
  return out;
}

OrthonormalLine orthonormal_retract(const OrthonormalLine& o, const Eigen::Vector4d& delta) {
  OrthonormalLine out;
  out.psi = o.psi * Rotation::exp(delta.head<3>());
  out.phi = o.phi * std::exp(delta[3]);
  return out;
}

Eigen::Vector4d orthonormal_boxminus(const OrthonormalLine& o, const OrthonormalLine& ref) {
  Eigen::Vector4d d;
  d.head<3>() = (ref.psi.inverse() * o.psi).log();
  d[3] = std::log(o.phi / ref.phi);
  return d;
}

}  // namespace mwvio
