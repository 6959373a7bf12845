#include "mwvio/factors/factors.h"

#include <cmath>

#include "mwvio/errors.h"

namespace mwvio {

namespace {

Eigen::Matrix4d quat_left(const Eigen::Quaterniond& q) {
  Eigen::Matrix4d m;
  m << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(),  q.w(), -q.z(),  q.y(),
       q.y(),  q.z(),  q.w(), -q.x(),
       q.z(), -q.y(),  q.x(),  q.w();
  return m;
}

Eigen::Matrix4d quat_right(const Eigen::Quaterniond& q) {
  Eigen::Matrix4d m;
  m << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(),  q.w(),  q.z(), -q.y(),
       q.y(), -q.z(),  q.w(),  q.x(),
       q.z(),  q.y(), -q.x(),  q.w();
  return m;
}

// Projected-line geometry shared by the line reprojection and structural
// residuals: l = R_wc^T (n_w - p_wc x d_w) plus its Jacobians w.r.t. the pose
// and line tangents.
struct LineProjection {
  Eigen::Vector3d l;
  double s;                     // sqrt(l1^2 + l2^2)
  Eigen::Matrix3d dl_dtheta;    // pose rotation tangent
  Eigen::Matrix3d dl_dp;        // pose translation tangent
  Eigen::Matrix<double, 3, 4> dl_dline;
};

LineProjection project_line_with_jacobians(const RigidTransform& pose_mb,
                                           const OrthonormalLine& line,
                                           const RigidTransform& t_bc) {
  const Eigen::Matrix3d r = pose_mb.r.matrix();
  const Eigen::Matrix3d rbc = t_bc.r.matrix();
  const Eigen::Matrix3d rwc = r * rbc;
  const Eigen::Vector3d pwc = pose_mb.t + r * t_bc.t;

  const Eigen::Matrix3d psi = line.psi.matrix();
  const Eigen::Vector3d n_w = line.phi * psi.col(0);
  const Eigen::Vector3d d_w = psi.col(1);

  const Eigen::Vector3d m = n_w - pwc.cross(d_w);

  LineProjection out;
  out.l = rwc.transpose() * m;
  out.s = std::sqrt(out.l.x() * out.l.x() + out.l.y() * out.l.y());
  if (out.s < 1e-12)
    throw ProjectionDegenerate("line projection: (l1, l2) vanishes");

  out.dl_dtheta =
      rbc.transpose() * skew(r.transpose() * m) - rwc.transpose() * skew(d_w) * r * skew(t_bc.t);
  out.dl_dp = rwc.transpose() * skew(d_w);

  const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0);
  out.dl_dline.leftCols<3>() =
      rwc.transpose() * (-line.phi * psi * skew(e1) + skew(pwc) * psi * skew(e2));
  out.dl_dline.col(3) = rwc.transpose() * (line.phi * psi.col(0));
  return out;
}

// d(|l^T p| / s)/dl for a fixed homogeneous point p; returns the signed row
// and the sign factor separately.
Eigen::RowVector3d point_line_distance_jacobian(const Eigen::Vector3d& l, double s,
                                                const Eigen::Vector3d& p, double& sign) {
  const double num = l.dot(p);
  sign = num >= 0.0 ? 1.0 : -1.0;
  Eigen::RowVector3d d = p.transpose() / s;
  d.head<2>() -= num / (s * s * s) * l.head<2>().transpose();
  return sign * d;
}

}  // namespace

double huber(double x) { return x <= 1.0 ? x : 2.0 * std::sqrt(x) - 1.0; }

double huber_derivative(double x) { return x <= 1.0 ? 1.0 : 1.0 / std::sqrt(x); }

FactorEval line_reproj_residual(const RigidTransform& pose_mb, int pose_id,
                                const OrthonormalLine& line, int line_id,
                                const Eigen::Vector2d& obs_start, const Eigen::Vector2d& obs_end,
                                const RigidTransform& t_bc, double sigma) {
  const LineProjection lp = project_line_with_jacobians(pose_mb, line, t_bc);

  const Eigen::Vector3d ps(obs_start.x(), obs_start.y(), 1.0);
  const Eigen::Vector3d pe(obs_end.x(), obs_end.y(), 1.0);

  FactorEval out;
  out.residual.resize(2);
  out.residual << std::abs(lp.l.dot(ps)) / lp.s, std::abs(lp.l.dot(pe)) / lp.s;

  double sign_s, sign_e;
  Eigen::Matrix<double, 2, 3> de_dl;
  de_dl.row(0) = point_line_distance_jacobian(lp.l, lp.s, ps, sign_s);
  de_dl.row(1) = point_line_distance_jacobian(lp.l, lp.s, pe, sign_e);

  Eigen::MatrixXd j_pose(2, 6);
  j_pose << de_dl * lp.dl_dtheta, de_dl * lp.dl_dp;
  Eigen::MatrixXd j_line = de_dl * lp.dl_dline;

  out.jacobians.emplace_back(BlockId{BlockKind::Pose, pose_id}, std::move(j_pose));
  out.jacobians.emplace_back(BlockId{BlockKind::Line, line_id}, std::move(j_line));
  out.sqrt_info = (1.0 / sigma) * Eigen::Matrix2d::Identity();
  return out;
}

FactorEval point_reproj_residual(const RigidTransform& host_mb, int host_id,
                                 const RigidTransform& target_mb, int target_id, double inv_depth,
                                 int point_id, const Eigen::Vector2d& obs_host,
                                 const Eigen::Vector2d& obs_target, const RigidTransform& t_bc,
                                 double sigma) {
  if (inv_depth <= 0.0) throw InvalidArgument("point_reproj_residual: inverse depth <= 0");
  const Eigen::Matrix3d rh = host_mb.r.matrix();
  const Eigen::Matrix3d rt = target_mb.r.matrix();
  const Eigen::Matrix3d rbc = t_bc.r.matrix();

  const Eigen::Vector3d ph(obs_host.x(), obs_host.y(), 1.0);
  const Eigen::Vector3d p_cam = ph / inv_depth;
  const Eigen::Vector3d b = rbc * p_cam + t_bc.t;           // host body
  const Eigen::Vector3d p_w = rh * b + host_mb.t;           // world
  const Eigen::Vector3d c = rt.transpose() * (p_w - target_mb.t);  // target body
  const Eigen::Vector3d p_t = rbc.transpose() * (c - t_bc.t);      // target camera

  if (p_t.z() <= 1e-6) throw BehindCamera("point_reproj_residual: point behind target camera");

  FactorEval out;
  out.residual.resize(2);
  out.residual << p_t.x() / p_t.z() - obs_target.x(), p_t.y() / p_t.z() - obs_target.y();

  Eigen::Matrix<double, 2, 3> de_dpt;
  const double iz = 1.0 / p_t.z();
  de_dpt << iz, 0, -p_t.x() * iz * iz, 0, iz, -p_t.y() * iz * iz;

  const Eigen::Matrix3d dpt_dpw = rbc.transpose() * rt.transpose();

  Eigen::MatrixXd j_host(2, 6);
  j_host << de_dpt * dpt_dpw * (-rh * skew(b)), de_dpt * dpt_dpw;

  Eigen::MatrixXd j_target(2, 6);
  j_target << de_dpt * rbc.transpose() * skew(c), de_dpt * (-dpt_dpw);

  Eigen::MatrixXd j_depth =
      de_dpt * dpt_dpw * rh * rbc * (-ph / (inv_depth * inv_depth));

  out.jacobians.emplace_back(BlockId{BlockKind::Pose, host_id}, std::move(j_host));
  out.jacobians.emplace_back(BlockId{BlockKind::Pose, target_id}, std::move(j_target));
  out.jacobians.emplace_back(BlockId{BlockKind::Point, point_id}, std::move(j_depth));
  out.sqrt_info = (1.0 / sigma) * Eigen::Matrix2d::Identity();
  return out;
}

FactorEval mf_rotation_residual(const Rotation& r_mf_meas, const RigidTransform& pose_mb,
                                int pose_id, double sigma_rad) {
  const Eigen::Quaterniond q_mf = r_mf_meas.quaternion();
  const Eigen::Quaterniond q_vio = pose_mb.r.quaternion();

  const Eigen::Matrix4d m = quat_left(q_mf) * quat_right(q_vio.conjugate());
  Eigen::Vector4d err = m.col(0);  // q_mf x q_vio^-1 as (w, x, y, z)
  double sign = 1.0;
  if (err[0] < 0.0) sign = -1.0;  // shorter representative of the double cover

  FactorEval out;
  out.residual = 2.0 * sign * err.tail<3>();

  // e(d) = 2 * sign * [M (1, -d/2)]_xyz  =>  J = -sign * M[1:3, 1:3]
  Eigen::MatrixXd j(3, 6);
  j.setZero();
  j.leftCols<3>() = -sign * m.bottomRightCorner<3, 3>();
  out.jacobians.emplace_back(BlockId{BlockKind::Pose, pose_id}, std::move(j));
  out.sqrt_info = (1.0 / sigma_rad) * Eigen::Matrix3d::Identity();
  return out;
}

FactorEval struct_line_residual(const RigidTransform& pose_mb, int pose_id,
                                const OrthonormalLine& line, int line_id, Axis axis,
                                const Rotation& mf_r_cm, const RigidTransform& t_bc,
                                double sigma) {
  if (axis == Axis::None)
    throw InvalidArgument("struct_line_residual: line has no axis label");
  const LineProjection lp = project_line_with_jacobians(pose_mb, line, t_bc);
  const Eigen::Vector3d vp = mf_r_cm.col(int(axis));

  FactorEval out;
  out.residual.resize(1);
  out.residual << std::abs(lp.l.dot(vp)) / lp.s;

  double sign;
  const Eigen::RowVector3d de_dl = point_line_distance_jacobian(lp.l, lp.s, vp, sign);

  Eigen::MatrixXd j_pose(1, 6);
  j_pose << de_dl * lp.dl_dtheta, de_dl * lp.dl_dp;
  Eigen::MatrixXd j_line = de_dl * lp.dl_dline;

  out.jacobians.emplace_back(BlockId{BlockKind::Pose, pose_id}, std::move(j_pose));
  out.jacobians.emplace_back(BlockId{BlockKind::Line, line_id}, std::move(j_line));
  out.sqrt_info = Eigen::MatrixXd::Constant(1, 1, 1.0 / sigma);
  return out;
}

FactorEval line_axis_prior_residual(const OrthonormalLine& line, int line_id, Axis axis,
                                    double sigma_rad) {
  if (axis == Axis::None)
    throw InvalidArgument("line_axis_prior_residual: line has no axis label");
  const int a = int(axis);
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  Eigen::Vector3d eb = Eigen::Vector3d::Zero(), ec = Eigen::Vector3d::Zero();
  eb[b] = 1.0;
  ec[c] = 1.0;

  const Eigen::Matrix3d psi = line.psi.matrix();
  const Eigen::Vector3d d = psi.col(1);

  FactorEval out;
  out.residual.resize(2);
  out.residual << d.dot(eb), d.dot(ec);

  const Eigen::Vector3d e2(0, 1, 0);
  Eigen::MatrixXd j(2, 4);
  j.setZero();
  j.row(0).head<3>() = -eb.transpose() * psi * skew(e2);
  j.row(1).head<3>() = -ec.transpose() * psi * skew(e2);
  out.jacobians.emplace_back(BlockId{BlockKind::Line, line_id}, std::move(j));
  out.sqrt_info = (1.0 / sigma_rad) * Eigen::Matrix2d::Identity();
  return out;
}

FactorEval relpose_odometry_residual(const RigidTransform& pose_i, int id_i,
                                     const RigidTransform& pose_j, int id_j,
                                     const RigidTransform& meas, double sigma_rot,
                                     double sigma_trans) {
  const Eigen::Matrix3d ri = pose_i.r.matrix();
  const Eigen::Matrix3d rj = pose_j.r.matrix();
  const Eigen::Matrix3d rz = meas.r.matrix();

  const Rotation e_rot = Rotation::unchecked(rz.transpose() * ri.transpose() * rj);
  const Eigen::Vector3d er = e_rot.log();
  const Eigen::Vector3d et = ri.transpose() * (pose_j.t - pose_i.t) - meas.t;

  FactorEval out;
  out.residual.resize(6);
  out.residual << er, et;

  const Eigen::Matrix3d jr_inv = so3_right_jacobian_inverse(er);

  Eigen::MatrixXd j_i(6, 6);
  j_i.setZero();
  j_i.topLeftCorner<3, 3>() = -jr_inv * rj.transpose() * ri;
  j_i.bottomLeftCorner<3, 3>() = skew(ri.transpose() * (pose_j.t - pose_i.t));
  j_i.bottomRightCorner<3, 3>() = -ri.transpose();

  Eigen::MatrixXd j_j(6, 6);
  j_j.setZero();
  j_j.topLeftCorner<3, 3>() = jr_inv;
  j_j.bottomRightCorner<3, 3>() = ri.transpose();

  out.jacobians.emplace_back(BlockId{BlockKind::Pose, id_i}, std::move(j_i));
  out.jacobians.emplace_back(BlockId{BlockKind::Pose, id_j}, std::move(j_j));

  Eigen::VectorXd w(6);
  w << 1.0 / sigma_rot, 1.0 / sigma_rot, 1.0 / sigma_rot, 1.0 / sigma_trans, 1.0 / sigma_trans,
      1.0 / sigma_trans;
  out.sqrt_info = w.asDiagonal();
  return out;
}

}  // namespace mwvio
