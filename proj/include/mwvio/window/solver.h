#pragma once

#include "mwvio/window/window.h"

namespace mwvio {

struct BackendConfig {
  int window_size = 10;
  RigidTransform t_bc;  // camera in body

  // observation noise, normalized coordinates / radians
  double sigma_point = 1.5 / 460.0;
  double sigma_line = 1.5 / 460.0;
  double sigma_struct = 1.0 / 460.0;
  double sigma_mf_rot = 1.0 * M_PI / 180.0;
  double sigma_axis_prior = 1.0 * M_PI / 180.0;

  bool use_manhattan = true;
  bool use_struct_lines = true;

  int max_iterations = 50;
  double min_baseline_m = 0.02;
  double min_baseline_deg = 2.0;
};

struct SolveReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  int accepted = 0;
  int rejected = 0;
  int n_odometry = 0;
  int n_point = 0;
  int n_line = 0;
  int n_mf = 0;
  int n_struct = 0;
  int n_axis_prior = 0;
  bool prior_used = false;
};

// Levenberg-Marquardt over all window tangent parameters. Damping starts at
// 1e-4, x10 on rejected steps, /10 on accepted ones; stops on relative cost
// decrease < 1e-6 or after max_iterations. The first frame's pose is held
// constant unless the prior constrains it. Throws SolverDiverged after 5
// consecutive rejections at the damping cap of 1e8.
SolveReport optimize(WindowState& w, const BackendConfig& cfg);

// Linearize every factor touching the oldest frame at the current estimate,
// Schur-complement out the frame's tangent block, the inverse depths hosted
// in it and lines seen only by it, and fold the result into the prior. Points
// hosted in the departing frame are re-hosted to their next observation.
void marginalize_oldest(WindowState& w, const BackendConfig& cfg);

struct FramePacket {
  int frame_idx = -1;
  double timestamp = 0.0;
  std::optional<RigidTransform> initial_pose;   // first frame only
  std::optional<OdometryMeasurement> odometry;  // from the previous frame
  std::vector<std::pair<long, Eigen::Vector2d>> points;  // normalized
  struct LineObservation {
    long id;
    Eigen::Vector2d s, e;  // normalized endpoints
    Axis axis = Axis::None;
  };
  std::vector<LineObservation> lines;
};

// Append a frame, triangulate what has enough baseline, optimize, marginalize
// when the window is full, prune dead landmarks.
SolveReport manage_window(WindowState& w, const FramePacket& packet, const BackendConfig& cfg);

}  // namespace mwvio
