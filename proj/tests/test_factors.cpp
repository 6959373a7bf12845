#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mwvio/factors/factors.h"
#include "mwvio/factors/fd_check.h"

using namespace mwvio;

namespace {

std::mt19937_64 gen(11);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

Eigen::Vector3d random_vec(double s) {
  return {uniform(-s, s), uniform(-s, s), uniform(-s, s)};
}

Rotation random_rotation() {
  Eigen::Vector3d axis = random_vec(1.0);
  while (axis.norm() < 1e-6) axis = random_vec(1.0);
  return Rotation::exp(axis.normalized() * uniform(0.0, 2.5));
}

}  // namespace

TEST_CASE("huber norm") {
  CHECK(huber(1.0) == doctest::Approx(1.0));
  CHECK(huber(4.0) == doctest::Approx(3.0));
  CHECK(huber(0.25) == doctest::Approx(0.25));

  // continuous, monotone nondecreasing, bounded by x beyond 1
  double prev = 0.0;
  for (double x = 0.0; x < 20.0; x += 1e-3) {
    const double v = huber(x);
    CHECK(v >= prev - 1e-12);
    if (x >= 1.0) CHECK(v <= x + 1e-12);
    prev = v;
  }
  CHECK(std::abs(huber(1.0 - 1e-9) - huber(1.0 + 1e-9)) < 1e-6);
}

TEST_CASE("line reprojection: axis-aligned distances") {
  // world line through (0,0,1) along x projects onto v = 0
  const OrthonormalLine line =
      plucker_to_orthonormal(PluckerLine::through_points({0, 0, 1}, {1, 0, 1}));
  const RigidTransform identity;

  const FactorEval fe =
      line_reproj_residual(identity, 0, line, 0, {2.0, 3.0}, {5.0, 3.0}, RigidTransform{}, 1.0);
  CHECK(fe.residual[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fe.residual[1] == doctest::Approx(3.0).epsilon(1e-9));

  const FactorEval on_line =
      line_reproj_residual(identity, 0, line, 0, {2.0, 0.0}, {5.0, 0.0}, RigidTransform{}, 1.0);
  CHECK(on_line.residual.norm() < 1e-12);
}

TEST_CASE("line reprojection: invariant to plucker sign and scale") {
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d p = random_vec(4.0);
    const Eigen::Vector3d q = p + random_vec(2.0);
    if ((q - p).norm() < 0.3 || p.cross(q - p).norm() < 0.3) continue;
    const PluckerLine l1 = PluckerLine::through_points(p, q);
    PluckerLine l2;
    l2.n = -2.0 * l1.n;
    l2.d = -2.0 * l1.d;

    const RigidTransform pose{random_rotation(), random_vec(1.0)};
    const Eigen::Vector2d os(uniform(-0.5, 0.5), uniform(-0.5, 0.5));
    const Eigen::Vector2d oe(uniform(-0.5, 0.5), uniform(-0.5, 0.5));
    try {
      const FactorEval a = line_reproj_residual(pose, 0, plucker_to_orthonormal(l1), 0, os, oe,
                                                RigidTransform{}, 1.0);
      const FactorEval b = line_reproj_residual(pose, 0, plucker_to_orthonormal(l2), 0, os, oe,
                                                RigidTransform{}, 1.0);
      CHECK((a.residual - b.residual).norm() < 1e-10);
    } catch (const ProjectionDegenerate&) {
    }
  }
}

TEST_CASE("manhattan rotation residual") {
  const Rotation r = random_rotation();
  const RigidTransform pose{r, random_vec(1.0)};
  CHECK(mf_rotation_residual(r, pose, 0, 1.0).residual.norm() < 1e-12);

  // small rotation about z between measurement and estimate
  const RigidTransform pose2{Rotation::exp({0, 0, 0.01}), Eigen::Vector3d::Zero()};
  const FactorEval fe = mf_rotation_residual(Rotation{}, pose2, 0, 1.0);
  CHECK(fe.residual[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(fe.residual[1] == doctest::Approx(0.0).epsilon(1e-5));
  // e = 2 (q_mf x q_vio^-1)_xyz: the estimate leads the measurement, so the
  // z component comes out at -0.01 (small-angle magnitude 0.01)
  CHECK(fe.residual[2] == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(std::abs(fe.residual[2]) == doctest::Approx(0.01).epsilon(1e-4));

  // translation block of the jacobian is zero
  CHECK(fe.jacobians[0].second.rightCols(3).norm() == 0.0);
}

TEST_CASE("manhattan rotation residual: gauge covariance") {
  for (int i = 0; i < 50; ++i) {
    const Rotation meas = random_rotation();
    const RigidTransform pose{random_rotation(), random_vec(1.0)};
    const Rotation g = random_rotation();
    const FactorEval a = mf_rotation_residual(meas, pose, 0, 1.0);
    const FactorEval b = mf_rotation_residual(g * meas, {g * pose.r, pose.t}, 0, 1.0);
    CHECK(std::abs(a.residual.norm() - b.residual.norm()) < 1e-9);
  }
}

TEST_CASE("structural line residual: aligned line has zero residual") {
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    d[axis] = 1.0;
    Eigen::Vector3d p = random_vec(3.0);
    if (p.cross(d).norm() < 0.2) p += Eigen::Vector3d(0.7, 0.9, 1.1);
    const OrthonormalLine line = plucker_to_orthonormal(PluckerLine::through_points(p, p + d));

    const RigidTransform pose{random_rotation(), random_vec(1.0)};
    // the MF measurement consistent with this pose: R^c_M = (R^M_b)^-1
    const Rotation r_cm = pose.r.inverse();
    try {
      const FactorEval fe =
          struct_line_residual(pose, 0, line, 0, Axis(axis), r_cm, RigidTransform{}, 1.0);
      CHECK(fe.residual[0] < 1e-10);
    } catch (const ProjectionDegenerate&) {
    }
  }
}

TEST_CASE("relative pose odometry zeroes") {
  const RigidTransform pi{random_rotation(), random_vec(2.0)};
  const RigidTransform pj{random_rotation(), random_vec(2.0)};
  const RigidTransform meas = pi.inverse() * pj;
  CHECK(relpose_odometry_residual(pi, 0, pj, 1, meas, 1.0, 1.0).residual.norm() < 1e-10);
  CHECK(relpose_odometry_residual(RigidTransform{}, 0, RigidTransform{}, 1, RigidTransform{},
                                  1.0, 1.0)
            .residual.norm() < 1e-12);
}

TEST_CASE("all factor types pass the finite-difference oracle") {
  const auto reports = check_all_factors(123, 100);
  CHECK(reports.size() == 6);
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.trials == 100);
    CHECK(r.max_rel_error < 1e-5);
  }
}

TEST_CASE("fd oracle detects an injected jacobian fault") {
  const RigidTransform pose{random_rotation(), random_vec(1.0)};
  const OrthonormalLine line =
      plucker_to_orthonormal(PluckerLine::through_points({1, 2, 3}, {2, 2.5, 3.5}));
  const Eigen::Vector2d os(0.1, 0.2), oe(-0.2, 0.3);

  FactorEval nominal = line_reproj_residual(pose, 0, line, 0, os, oe, RigidTransform{}, 1.0);
  auto eval = [&](size_t b, const Eigen::VectorXd& d) -> Eigen::VectorXd {
    RigidTransform p2 = b == 0 ? pose_retract(pose, d) : pose;
    OrthonormalLine l2 = b == 1 ? orthonormal_retract(line, d) : line;
    return line_reproj_residual(p2, 0, l2, 0, os, oe, RigidTransform{}, 1.0).residual;
  };
  CHECK(fd_max_rel_error(nominal, eval) < 1e-5);

  nominal.jacobians[0].second(0, 2) += 0.1;
  CHECK(fd_max_rel_error(nominal, eval) > 1e-2);
}

TEST_CASE("fd oracle is stable at a zero-residual state") {
  // identical host/target geometry with a consistent depth: residual is zero
  const RigidTransform host;
  const RigidTransform target{Rotation{}, {0.3, 0.0, 0.0}};
  const Eigen::Vector3d p_w(0.5, 0.2, 4.0);
  const Eigen::Vector2d obs_h(p_w.x() / p_w.z(), p_w.y() / p_w.z());
  const Eigen::Vector3d p_t = target.inverse() * p_w;
  const Eigen::Vector2d obs_t(p_t.x() / p_t.z(), p_t.y() / p_t.z());

  const FactorEval fe = point_reproj_residual(host, 0, target, 1, 1.0 / p_w.z(), 0, obs_h, obs_t,
                                              RigidTransform{}, 1.0);
  CHECK(fe.residual.norm() < 1e-12);

  auto eval = [&](size_t b, const Eigen::VectorXd& d) -> Eigen::VectorXd {
    RigidTransform h2 = b == 0 ? pose_retract(host, d) : host;
    RigidTransform t2 = b == 1 ? pose_retract(target, d) : target;
    double l2 = b == 2 ? 1.0 / p_w.z() + d[0] : 1.0 / p_w.z();
    return point_reproj_residual(h2, 0, t2, 1, l2, 0, obs_h, obs_t, RigidTransform{}, 1.0)
        .residual;
  };
  // exact-zero derivatives land on the absolute floor: finite and small,
  // not the usual relative match
  const double err = fd_max_rel_error(fe, eval);
  CHECK(std::isfinite(err));
  CHECK(err < 1e-2);
}
