#pragma once

#include <vector>

#include "mwvio/geom/line3d.h"
#include "mwvio/geom/transform.h"
#include "mwvio/lineflow/segment.h"
#include "mwvio/manhattan/frame.h"

namespace mwvio {

enum class BlockKind { Pose, Line, Point };

struct BlockId {
  BlockKind kind = BlockKind::Pose;
  int id = 0;
  friend bool operator==(const BlockId&, const BlockId&) = default;
  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

inline int block_dim(BlockKind k) {
  switch (k) {
    case BlockKind::Pose: return 6;
    case BlockKind::Line: return 4;
    case BlockKind::Point: return 1;
  }
  return 0;
}

struct FactorEval {
  Eigen::VectorXd residual;
  std::vector<std::pair<BlockId, Eigen::MatrixXd>> jacobians;
  Eigen::MatrixXd sqrt_info;  // information square root, applied by the solver
};

// rho(x) = x for x <= 1, 2*sqrt(x) - 1 otherwise; applied to the squared
// weighted residual norm.
double huber(double x);
double huber_derivative(double x);

// Distance of two observed endpoints to the reprojected infinite line. The
// pose is the body pose T^M_b; t_bc is the camera-in-body extrinsic.
FactorEval line_reproj_residual(const RigidTransform& pose_mb, int pose_id,
                                const OrthonormalLine& line, int line_id,
                                const Eigen::Vector2d& obs_start, const Eigen::Vector2d& obs_end,
                                const RigidTransform& t_bc, double sigma);

// Standard two-view inverse-depth reprojection residual.
FactorEval point_reproj_residual(const RigidTransform& host_mb, int host_id,
                                 const RigidTransform& target_mb, int target_id, double inv_depth,
                                 int point_id, const Eigen::Vector2d& obs_host,
                                 const Eigen::Vector2d& obs_target, const RigidTransform& t_bc,
                                 double sigma);

// e = 2 * (q_mf x q_vio^-1)_xyz with the measured Manhattan-derived body
// rotation against the estimated one; zero Jacobian on translation.
FactorEval mf_rotation_residual(const Rotation& r_mf_meas, const RigidTransform& pose_mb,
                                int pose_id, double sigma_rad);

// Distance between the homogeneous vanishing point of the line's axis and the
// reprojected line.
FactorEval struct_line_residual(const RigidTransform& pose_mb, int pose_id,
                                const OrthonormalLine& line, int line_id, Axis axis,
                                const Rotation& mf_r_cm, const RigidTransform& t_bc, double sigma);

// Soft prior tying a structural line's world direction to its axis.
FactorEval line_axis_prior_residual(const OrthonormalLine& line, int line_id, Axis axis,
                                    double sigma_rad);

// Between-factor on consecutive body poses, substitute for an inertial term.
FactorEval relpose_odometry_residual(const RigidTransform& pose_i, int id_i,
                                     const RigidTransform& pose_j, int id_j,
                                     const RigidTransform& meas, double sigma_rot,
                                     double sigma_trans);

}  // namespace mwvio
