#pragma once

#include "mwvio/lineflow/detector.h"
#include "mwvio/manhattan/tracking.h"
#include "mwvio/pipeline/evaluate.h"
#include "mwvio/pipeline/sim.h"
#include "mwvio/window/solver.h"

namespace mwvio {

struct VioConfig {
  BackendConfig backend;
  bool pixels_mode = false;  // run the detector/tracker on rasterized frames
  int verify_half_width = 3;
  double d_angle_deg = 0.5;
  int align_frame = 10;

  DetectorParams detector;
  int pyramid_levels = 4;
  int track_iters = 10;
};

struct FrameDiag {
  int frame_idx = -1;
  MfCase mf_case = MfCase::None;
  bool mf_found = false;
  int verified_frame = -1;  // frame whose MF was verified this step, -1 if none
  double verify_error_deg = -1.0;
  bool verify_accept = false;
  SolveReport solve;
  int n_line_obs = 0;
  int n_point_obs = 0;
};

struct VioResult {
  Trajectory trajectory;
  std::vector<FrameDiag> diagnostics;
  bool aligned = false;
  Rotation r_mw;  // R^M_W once aligned
};

// Per-frame flow: Manhattan tracking-by-detection over the (tracked or
// simulator-provided) line observations, pose-guided verification with an
// n-frame delay, world alignment once at align_frame, then the sliding-window
// back-end. A failing Manhattan stage degrades to the point-line back-end
// instead of aborting.
VioResult run_vio(const Dataset& ds, const VioConfig& cfg);

// map the backend sigmas to the dataset's camera and odometry noise
VioConfig default_vio_config(const Dataset& ds);

}  // namespace mwvio
