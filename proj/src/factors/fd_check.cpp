#include "mwvio/factors/fd_check.h"

#include <random>

#include "mwvio/errors.h"

namespace mwvio {

double fd_max_rel_error(const FactorEval& nominal, const PerturbedEval& eval, double step) {
  constexpr double kFloor = 1e-8;
  double worst = 0.0;
  for (size_t b = 0; b < nominal.jacobians.size(); ++b) {
    const Eigen::MatrixXd& analytic = nominal.jacobians[b].second;
    const int dim = int(analytic.cols());
    for (int c = 0; c < dim; ++c) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(dim);
      delta[c] = step;
      const Eigen::VectorXd rp = eval(b, delta);
      delta[c] = -step;
      const Eigen::VectorXd rm = eval(b, delta);
      const Eigen::VectorXd fd = (rp - rm) / (2.0 * step);
      for (int r = 0; r < fd.size(); ++r) {
        const double denom = std::max(kFloor, std::max(std::abs(fd[r]), std::abs(analytic(r, c))));
        worst = std::max(worst, std::abs(fd[r] - analytic(r, c)) / denom);
      }
    }
  }
  return worst;
}

namespace {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(unsigned seed) : gen(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  Eigen::Vector3d vec3(double scale) {
    return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
  }
  Rotation rotation() {
    Eigen::Vector3d axis = vec3(1.0);
    while (axis.norm() < 1e-6) axis = vec3(1.0);
    return Rotation::exp(axis.normalized() * uniform(0.0, 2.5));
  }
  RigidTransform pose(double t_scale = 2.0) { return {rotation(), vec3(t_scale)}; }
  OrthonormalLine line() {
    // a line at a healthy distance from the origin with a random direction
    while (true) {
      const Eigen::Vector3d p = vec3(4.0);
      Eigen::Vector3d d = vec3(1.0);
      if (p.norm() < 0.5 || d.norm() < 1e-3) continue;
      d.normalize();
      if (p.cross(d).norm() < 0.2) continue;
      return plucker_to_orthonormal(PluckerLine::through_points(p, p + d));
    }
  }
};

}  // namespace

std::vector<FactorCheckReport> check_all_factors(unsigned seed, int trials) {
  std::vector<FactorCheckReport> reports;
  const RigidTransform t_bc{Rotation::exp({0.02, -0.01, 0.03}), {0.05, -0.02, 0.01}};

  {  // line reprojection
    Rng rng(seed);
    FactorCheckReport rep{"line_reproj", 0.0, 0};
    for (int attempt = 0; rep.trials < trials && attempt < 100 * trials; ++attempt) {
      RigidTransform pose = rng.pose();
      OrthonormalLine line = rng.line();
      const Eigen::Vector2d obs_s(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
      const Eigen::Vector2d obs_e(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
      FactorEval nominal;
      try {
        nominal = line_reproj_residual(pose, 0, line, 0, obs_s, obs_e, t_bc, 1.0);
      } catch (const ProjectionDegenerate&) {
        continue;
      }
      auto eval = [&](size_t b, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        RigidTransform p2 = b == 0 ? pose_retract(pose, d) : pose;
        OrthonormalLine l2 = b == 1 ? orthonormal_retract(line, d) : line;
        return line_reproj_residual(p2, 0, l2, 0, obs_s, obs_e, t_bc, 1.0).residual;
      };
      rep.max_rel_error = std::max(rep.max_rel_error, fd_max_rel_error(nominal, eval));
      ++rep.trials;
    }
    reports.push_back(rep);
  }

  {  // point reprojection
    Rng rng(seed + 1);
    FactorCheckReport rep{"point_reproj", 0.0, 0};
    for (int attempt = 0; rep.trials < trials && attempt < 100 * trials; ++attempt) {
      RigidTransform host = rng.pose(1.0);
      RigidTransform target = rng.pose(1.0);
      const double inv_depth = rng.uniform(0.2, 2.0);
      const Eigen::Vector2d obs_h(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
      const Eigen::Vector2d obs_t(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
      FactorEval nominal;
      try {
        nominal = point_reproj_residual(host, 0, target, 1, inv_depth, 0, obs_h, obs_t, t_bc, 1.0);
      } catch (const BehindCamera&) {
        continue;
      }
      auto eval = [&](size_t b, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        RigidTransform h2 = b == 0 ? pose_retract(host, d) : host;
        RigidTransform t2 = b == 1 ? pose_retract(target, d) : target;
        double l2 = b == 2 ? inv_depth + d[0] : inv_depth;
        return point_reproj_residual(h2, 0, t2, 1, l2, 0, obs_h, obs_t, t_bc, 1.0).residual;
      };
      rep.max_rel_error = std::max(rep.max_rel_error, fd_max_rel_error(nominal, eval));
      ++rep.trials;
    }
    reports.push_back(rep);
  }

  {  // manhattan rotation
    Rng rng(seed + 2);
    FactorCheckReport rep{"mf_rotation", 0.0, 0};
    for (int t = 0; t < trials; ++t) {
      RigidTransform pose = rng.pose();
      const Rotation meas = rng.rotation();
      FactorEval nominal = mf_rotation_residual(meas, pose, 0, 1.0);
      auto eval = [&](size_t, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        return mf_rotation_residual(meas, pose_retract(pose, d), 0, 1.0).residual;
      };
      rep.max_rel_error = std::max(rep.max_rel_error, fd_max_rel_error(nominal, eval));
      ++rep.trials;
    }
    reports.push_back(rep);
  }

  {  // structural line
    Rng rng(seed + 3);
    FactorCheckReport rep{"struct_line", 0.0, 0};
    for (int attempt = 0; rep.trials < trials && attempt < 100 * trials; ++attempt) {
      RigidTransform pose = rng.pose();
      OrthonormalLine line = rng.line();
      const Rotation mf = rng.rotation();
      const Axis axis = Axis(attempt % 3);
      FactorEval nominal;
      try {
        nominal = struct_line_residual(pose, 0, line, 0, axis, mf, t_bc, 1.0);
      } catch (const ProjectionDegenerate&) {
        continue;
      }
      auto eval = [&](size_t b, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        RigidTransform p2 = b == 0 ? pose_retract(pose, d) : pose;
        OrthonormalLine l2 = b == 1 ? orthonormal_retract(line, d) : line;
        return struct_line_residual(p2, 0, l2, 0, axis, mf, t_bc, 1.0).residual;
      };
      rep.max_rel_error = std::max(rep.max_rel_error, fd_max_rel_error(nominal, eval));
      ++rep.trials;
    }
    reports.push_back(rep);
  }

  {  // relative pose odometry
    Rng rng(seed + 4);
    FactorCheckReport rep{"relpose_odometry", 0.0, 0};
    for (int t = 0; t < trials; ++t) {
      RigidTransform pi = rng.pose();
      RigidTransform pj = rng.pose();
      RigidTransform meas = rng.pose(0.5);
      FactorEval nominal = relpose_odometry_residual(pi, 0, pj, 1, meas, 1.0, 1.0);
      auto eval = [&](size_t b, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        RigidTransform a = b == 0 ? pose_retract(pi, d) : pi;
        RigidTransform c = b == 1 ? pose_retract(pj, d) : pj;
        return relpose_odometry_residual(a, 0, c, 1, meas, 1.0, 1.0).residual;
      };
      rep.max_rel_error = std::max(rep.max_rel_error, fd_max_rel_error(nominal, eval));
      ++rep.trials;
    }
    reports.push_back(rep);
  }

  {  // structural-line axis prior
    Rng rng(seed + 5);
    FactorCheckReport rep{"line_axis_prior", 0.0, 0};
    for (int t = 0; t < trials; ++t) {
      OrthonormalLine line = rng.line();
      const Axis axis = Axis(t % 3);
      FactorEval nominal = line_axis_prior_residual(line, 0, axis, 1.0);
      auto eval = [&](size_t, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        return line_axis_prior_residual(orthonormal_retract(line, d), 0, axis, 1.0).residual;
      };
      rep.max_rel_error = std::max(rep.max_rel_error, fd_max_rel_error(nominal, eval));
      ++rep.trials;
    }
    reports.push_back(rep);
  }

  return reports;
}

}  // namespace mwvio
