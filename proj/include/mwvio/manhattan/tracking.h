#pragma once

#include <optional>
#include <vector>

#include "mwvio/manhattan/frame.h"

namespace mwvio {

struct MfTrackState {
  std::optional<ManhattanFrame> prev;
  int consecutive_failures = 0;
  std::optional<Rotation> r_mw_alignment;  // R^M_W, set once the worlds are aligned
};

enum class MfCase { Case1 = 1, Case2 = 2, Case3 = 3, Detect = 4, None = 0 };

struct MfTrackResult {
  std::optional<ManhattanFrame> mf;
  MfCase used = MfCase::None;
};

// Tracking-by-detection. Structural-line counts per axis come from the axis
// labels carried on the input lines (the previous frame's classification,
// propagated by track id). On success the lines are re-stamped with the new
// classification and state.prev is replaced.
//
// Case 1: all three axes have more than 2 tracked structural lines; the seed
//         comes from per-axis averaged vanishing directions.
// Case 2: one or two axes populated; polar-grid voting with structural lines
//         weighted 10x seeds the estimate.
// Case 3: no structural lines; seed from the previous frame's MF, else from
//         the back-end rotation through the world alignment, else re-detect.
MfTrackResult track_mf(MfTrackState& state, std::vector<LineSegment2D>& lines,
                       const std::optional<Rotation>& backend_r_wb, const Rotation& r_cb,
                       const CameraIntrinsics& intr = {}, int frame_idx = -1);

struct VerificationWindow {
  int half_width = 3;  // n
  struct Entry {
    Rotation r_mf;   // R^c_M of the frame
    Rotation r_vio;  // camera rotation from the VIO estimate, same convention
  };
  std::vector<Entry> entries;  // frames k-n ... k+n, center is the frame under test
};

struct VerifyResult {
  bool accept = false;
  double error_deg = 0.0;
};

// Average angular error between MF and VIO relative rotations over the window;
// accept when below d_angle_deg.
VerifyResult verify_mf(const VerificationWindow& win, double d_angle_deg = 0.5);

// Accept the first MF only when one axis lies within 10 degrees of the gravity
// direction and at least 2 classified lines support that axis.
bool initial_validity(const ManhattanFrame& mf, const Eigen::Vector3d& gravity_dir_cam,
                      std::vector<LineSegment2D>& lines, const CameraIntrinsics& intr = {});

}  // namespace mwvio
