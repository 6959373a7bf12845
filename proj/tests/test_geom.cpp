#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mwvio/geom/line3d.h"
#include "mwvio/geom/rotation.h"
#include "mwvio/geom/transform.h"

using namespace mwvio;

namespace {

std::mt19937_64 gen(42);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

Eigen::Vector3d random_vec(double scale) {
  return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
}

Rotation random_rotation(double max_angle = M_PI * 0.99) {
  Eigen::Vector3d axis = random_vec(1.0);
  while (axis.norm() < 1e-6) axis = random_vec(1.0);
  return Rotation::exp(axis.normalized() * uniform(0.0, max_angle));
}

PluckerLine random_line() {
  while (true) {
    const Eigen::Vector3d p = random_vec(5.0);
    const Eigen::Vector3d q = random_vec(5.0);
    if ((q - p).norm() < 0.5) continue;
    if (p.cross(q - p).norm() < 0.1) continue;  // not through the origin
    return PluckerLine::through_points(p, q);
  }
}

}  // namespace

TEST_CASE("so3 exp basics") {
  CHECK((Rotation::exp({0, 0, 0}).matrix() - Eigen::Matrix3d::Identity()).norm() == 0.0);

  const Rotation rz = Rotation::exp({0, 0, M_PI / 2});
  CHECK(rz.matrix()(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rz.matrix()(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rz.matrix().row(1)[0] == doctest::Approx(1.0));
  // row 1 of the matrix is (sin is in (1,0)): check the stated row (0,-1,0) maps e2
  const Eigen::Vector3d e2 = rz * Eigen::Vector3d(0, 1, 0);
  CHECK(e2.isApprox(Eigen::Vector3d(-1, 0, 0), 1e-12));
}

TEST_CASE("so3 log/exp round trip over 1000 samples") {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::Vector3d axis = random_vec(1.0);
    while (axis.norm() < 1e-6) axis = random_vec(1.0);
    const Eigen::Vector3d w = axis.normalized() * uniform(0.0, 0.99 * M_PI);
    const Eigen::Vector3d back = Rotation::exp(w).log();
    worst = std::max(worst, (back - w).norm());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("rotation invariants enforced") {
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_rotation();
    CHECK(Rotation::is_rotation(r.matrix()));
  }
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = 1.001;
  CHECK_THROWS_AS(Rotation{bad}, InvalidArgument);
}

TEST_CASE("nearest_rotation idempotence and scaling") {
  const Rotation r = random_rotation();
  CHECK((nearest_rotation(r.matrix()).matrix() - r.matrix()).norm() < 1e-12);
  CHECK((nearest_rotation(1.5 * Eigen::Matrix3d::Identity()).matrix() -
         Eigen::Matrix3d::Identity())
            .norm() < 1e-12);
  CHECK_THROWS_AS(nearest_rotation(Eigen::Matrix3d::Zero()), SingularInput);
}

TEST_CASE("nearest_rotation beats brute-force sampling") {
  for (int trial = 0; trial < 10; ++trial) {
    const Rotation r = random_rotation();
    Eigen::Matrix3d noisy = r.matrix();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) noisy(i, j) += uniform(-1e-3, 1e-3);

    const Rotation polar = nearest_rotation(noisy);
    CHECK(rotation_angle(polar.inverse() * r) < 1e-2);

    // no sampled rotation near the answer does better in Frobenius distance
    const double best = (polar.matrix() - noisy).norm();
    for (int i = 0; i < 500; ++i) {
      const Rotation probe = polar * Rotation::exp(random_vec(0.05));
      CHECK((probe.matrix() - noisy).norm() >= best - 1e-12);
    }
  }
}

TEST_CASE("plucker from planes: axis through origin") {
  const Plane x0(Eigen::Vector4d(1, 0, 0, 0));
  const Plane y0(Eigen::Vector4d(0, 1, 0, 0));
  const PluckerLine l = plucker_from_planes(x0, y0);
  CHECK(l.n.norm() < 1e-12);
  CHECK(l.d.normalized().isApprox(Eigen::Vector3d(0, 0, -1), 1e-12));
}

TEST_CASE("plucker from planes: offset axis") {
  const Plane z1(Eigen::Vector4d(0, 0, 1, -1));  // z = 1
  const Plane y0(Eigen::Vector4d(0, 1, 0, 0));
  const PluckerLine l = plucker_from_planes(z1, y0);
  CHECK(std::abs(l.d.normalized().x()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(l.n.dot(l.d)) < 1e-12);
  // the point (0,0,1) lies on the line
  CHECK(l.distance_to_point({0, 0, 1}) < 1e-12);
}

TEST_CASE("plucker from planes: membership of sampled intersection points") {
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector3d p0 = random_vec(3.0);
    Eigen::Vector3d d = random_vec(1.0).normalized();
    Eigen::Vector3d n1 = d.unitOrthogonal();
    Eigen::Vector3d n2 = Rotation::exp(d * uniform(0.3, 2.8)) * n1;
    const Plane pl1 = Plane::from_point_normal(p0, n1);
    const Plane pl2 = Plane::from_point_normal(p0, n2);
    const PluckerLine l = plucker_from_planes(pl1, pl2);
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector3d q = p0 + uniform(-10.0, 10.0) * d;
      CHECK(l.distance_to_point(q) < 1e-9);
    }
  }
}

TEST_CASE("plucker from planes: parallel planes fail") {
  const Plane a(Eigen::Vector4d(0, 0, 1, -1));
  const Plane b(Eigen::Vector4d(0, 0, 1, 2));
  CHECK_THROWS_AS(plucker_from_planes(a, b), DegeneratePlanes);
}

TEST_CASE("plucker transform basics and round trip") {
  const PluckerLine l = random_line();

  const RigidTransform identity;
  const PluckerLine li = plucker_transform(identity, l);
  CHECK(li.n.isApprox(l.n, 1e-14));
  CHECK(li.d.isApprox(l.d, 1e-14));

  const Rotation r = random_rotation();
  const PluckerLine lr = plucker_transform({r, Eigen::Vector3d::Zero()}, l);
  CHECK(lr.n.isApprox(r * l.n, 1e-12));
  CHECK(lr.d.isApprox(r * l.d, 1e-12));

  double worst_rt = 0.0, worst_constraint = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PluckerLine line = random_line();
    const RigidTransform t{random_rotation(), random_vec(5.0)};
    const PluckerLine fwd = plucker_transform(t, line);
    worst_constraint = std::max(worst_constraint,
                                std::abs(fwd.n.dot(fwd.d)) / std::max(1.0, fwd.n.norm()));
    const PluckerLine back = plucker_transform(t.inverse(), fwd);
    worst_rt = std::max(worst_rt, (back.n - line.n).norm() + (back.d - line.d).norm());
  }
  CHECK(worst_rt < 1e-10);
  CHECK(worst_constraint < 1e-10);
}

TEST_CASE("orthonormal representation") {
  // line through (1,0,0) along z
  const PluckerLine l = PluckerLine::through_points({1, 0, 0}, {1, 0, 1});
  CHECK(l.n.isApprox(Eigen::Vector3d(0, -1, 0), 1e-12));
  const OrthonormalLine o = plucker_to_orthonormal(l);
  CHECK(o.phi == doctest::Approx(1.0).epsilon(1e-12));

  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PluckerLine line = random_line();
    const OrthonormalLine ortho = plucker_to_orthonormal(line);
    const PluckerLine back = orthonormal_to_plucker(ortho);
    worst = std::max(worst, (back.n.normalized() - line.n.normalized()).norm());
    worst = std::max(worst, (back.d.normalized() - line.d.normalized()).norm());
    worst = std::max(worst, std::abs(back.n.norm() / back.d.norm() - ortho.phi));

    // scale invariance
    PluckerLine scaled;
    scaled.n = 3.0 * line.n;
    scaled.d = 3.0 * line.d;
    const OrthonormalLine o2 = plucker_to_orthonormal(scaled);
    worst = std::max(worst, (o2.psi.matrix() - ortho.psi.matrix()).norm());
    worst = std::max(worst, std::abs(o2.phi - ortho.phi));
  }
  CHECK(worst < 1e-10);

  PluckerLine through_origin;
  through_origin.n = Eigen::Vector3d::Zero();
  through_origin.d = Eigen::Vector3d(0, 0, 1);
  CHECK_THROWS_AS(plucker_to_orthonormal(through_origin), LineThroughOrigin);
}

TEST_CASE("orthonormal retract") {
  const OrthonormalLine o = plucker_to_orthonormal(random_line());

  const OrthonormalLine same = orthonormal_retract(o, Eigen::Vector4d::Zero());
  CHECK((same.psi.matrix() - o.psi.matrix()).norm() < 1e-15);
  CHECK(same.phi == doctest::Approx(o.phi));

  const OrthonormalLine doubled = orthonormal_retract(o, {0, 0, 0, std::log(2.0)});
  CHECK(doubled.phi == doctest::Approx(2.0 * o.phi).epsilon(1e-12));

  // first-order consistency of the tangent
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector4d d;
    d << random_vec(1e-4), uniform(-1e-4, 1e-4);
    const Eigen::Vector4d back = orthonormal_boxminus(orthonormal_retract(o, d), o);
    CHECK((back - d).norm() < 1e-9);
  }
}

TEST_CASE("project_line") {
  CHECK(project_line({0, 1, 0}).isApprox(Eigen::Vector3d(0, 1, 0)));
  // l = (1, 0, -0.5) is the vertical line u = 0.5
  const Eigen::Vector3d l = project_line({1, 0, -0.5});
  CHECK(l.dot(Eigen::Vector3d(0.5, 2.0, 1.0)) == doctest::Approx(0.0));

  // projected endpoints of a camera-frame line satisfy l^T p = 0
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d p = random_vec(3.0);
    p.z() = uniform(1.0, 6.0);
    Eigen::Vector3d q = p + random_vec(2.0);
    q.z() = std::max(0.5, q.z());
    if (p.cross(q).norm() < 1e-3) continue;
    const PluckerLine line = PluckerLine::through_points(p, q);
    const Eigen::Vector3d coeffs = project_line(line.n);
    const Eigen::Vector3d pp(p.x() / p.z(), p.y() / p.z(), 1.0);
    const Eigen::Vector3d qq(q.x() / q.z(), q.y() / q.z(), 1.0);
    CHECK(std::abs(coeffs.dot(pp)) / coeffs.norm() < 1e-9);
    CHECK(std::abs(coeffs.dot(qq)) / coeffs.norm() < 1e-9);
  }
}

TEST_CASE("rigid transform composition and inverse") {
  for (int i = 0; i < 100; ++i) {
    const RigidTransform a{random_rotation(), random_vec(3.0)};
    const RigidTransform b{random_rotation(), random_vec(3.0)};
    const RigidTransform c{random_rotation(), random_vec(3.0)};
    const Eigen::Vector3d p = random_vec(3.0);
    CHECK((((a * b) * c) * p).isApprox((a * (b * c)) * p, 1e-10));
    const RigidTransform ii = a * a.inverse();
    CHECK((ii.r.matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(ii.t.norm() < 1e-9);
  }
}
