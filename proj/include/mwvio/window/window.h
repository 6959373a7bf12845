#pragma once

#include <map>
#include <optional>
#include <vector>

#include "mwvio/factors/factors.h"
#include "mwvio/geom/line3d.h"
#include "mwvio/manhattan/frame.h"

namespace mwvio {

struct OdometryMeasurement {
  RigidTransform rel;  // body pose of the later frame in the earlier body frame
  double sigma_rot = 1e-3;
  double sigma_trans = 1e-3;
};

struct FrameState {
  int frame_idx = -1;
  double timestamp = 0.0;
  RigidTransform pose;  // T^M_b
};

struct PointObs {
  int frame_idx;
  Eigen::Vector2d uv;  // normalized
};

struct PointLandmark {
  long id = -1;
  int host_frame = -1;
  double inv_depth = 0.0;
  bool active = false;
  std::vector<PointObs> obs;
};

struct LineObs {
  int frame_idx;
  Eigen::Vector2d s, e;  // normalized endpoints
  Axis axis = Axis::None;
};

struct LineLandmark {
  long id = -1;
  OrthonormalLine line;  // in the MW frame
  Axis axis = Axis::None;
  bool active = false;
  std::vector<LineObs> obs;
};

// Marginalization prior in square-root form: residual(x) = r0 + sqrt_h * (x [-] lin).
struct PriorBlock {
  struct Entry {
    BlockId id;
    int dim = 0;
    RigidTransform pose_lin;
    OrthonormalLine line_lin;
    double depth_lin = 0.0;
  };
  std::vector<Entry> entries;
  Eigen::MatrixXd sqrt_h;
  Eigen::VectorXd r0;

  int total_dim() const;
  int offset_of(const BlockId& id) const;  // -1 when absent
  bool covers(const BlockId& id) const { return offset_of(id) >= 0; }

  // Marginalize one covered block out of the prior (Schur complement on the
  // prior's own quadratic), keeping the information on the remaining blocks.
  void drop_block(const BlockId& id);
};

struct WindowState {
  std::vector<FrameState> frames;
  std::map<long, PointLandmark> points;
  std::map<long, LineLandmark> lines;
  std::map<int, OdometryMeasurement> odometry;  // keyed by destination frame_idx
  std::optional<PriorBlock> prior;
  std::map<int, ManhattanFrame> mfs;  // verified MF measurements by frame_idx

  const FrameState* frame(int idx) const;
  FrameState* frame(int idx);
};

// Plane-intersection line triangulation. Poses are camera-to-world.
PluckerLine triangulate_line(const Eigen::Vector2d& s_i, const Eigen::Vector2d& e_i,
                             const Eigen::Vector2d& s_j, const Eigen::Vector2d& e_j,
                             const RigidTransform& t_wc_i, const RigidTransform& t_wc_j,
                             double min_baseline_m = 0.02, double min_baseline_deg = 2.0);

// Midpoint-method point triangulation; returns the inverse depth in view i.
double triangulate_point(const Eigen::Vector2d& obs_i, const Eigen::Vector2d& obs_j,
                         const RigidTransform& t_wc_i, const RigidTransform& t_wc_j,
                         double min_baseline_m = 0.02, double min_baseline_deg = 2.0);

}  // namespace mwvio
