#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mwvio/camera.h"
#include "mwvio/geom/rotation.h"
#include "mwvio/lineflow/segment.h"

namespace mwvio {

// Rotation from the Manhattan world to a camera frame; columns are the three
// vanishing directions.
struct ManhattanFrame {
  Rotation r_cm;
  std::array<int, 3> support{0, 0, 0};  // structural lines per axis
  int frame_idx = -1;
  bool valid = false;
};

// latitude in [0, pi/2] x longitude in [0, 2*pi), 1 degree bins
struct PolarGrid {
  Eigen::MatrixXd bins = Eigen::MatrixXd::Zero(90, 360);

  double total() const { return bins.sum(); }
};

struct ClassifiedLines {
  std::array<std::vector<size_t>, 3> per_axis;  // indices into the input list
  std::vector<size_t> residue;
};

// Unit normal of the interpretation plane: normalize(p_s x p_e) with the
// endpoints back-projected to normalized homogeneous coordinates.
Eigen::Vector3d line_sphere_coeffs(const LineSegment2D& seg,
                                   const CameraIntrinsics& intr = {});

// 2-line hypothesis search: vp1 from a line pair, vp2 swept at 1 degree steps
// on the orthogonal great circle, scored by total inlier line length. Returns
// nothing when fewer than 6 lines are inliers or fewer than 2 axes have at
// least 2 inliers.
std::optional<ManhattanFrame> detect_mf_2line(const std::vector<LineSegment2D>& lines,
                                              const CameraIntrinsics& intr = {});

// Accumulate the weighted intersection of two lines on the polar grid.
// Weight is (lambda1 * len1) * (lambda2 * len2) * sin(2 * theta).
void vote_polar_grid(PolarGrid& grid, const LineSegment2D& l1, const LineSegment2D& l2,
                     double lambda1, double lambda2, const CameraIntrinsics& intr = {});

// Polar-grid seeded detection used when only one or two axes carry structural
// lines; structural lines vote with lambda = 10, common lines with 1.
std::optional<ManhattanFrame> detect_mf_polar(const std::vector<LineSegment2D>& lines,
                                              const CameraIntrinsics& intr = {});

// Gauss-Newton on so(3) minimizing the length-weighted squared alignment
// residuals between line coefficients and their vanishing directions.
Rotation refine_mf(const Rotation& r_init, const std::vector<LineSegment2D>& lines,
                   const ClassifiedLines& classified, const CameraIntrinsics& intr = {});

// Assign each line to the axis minimizing |coeff . vp_axis| when below
// sin(angle_thresh); stamps LineSegment2D::axis.
ClassifiedLines classify_lines(const Rotation& r_cm, std::vector<LineSegment2D>& lines,
                               const CameraIntrinsics& intr = {},
                               double angle_thresh_deg = 2.0);

// Among the 24 proper signed axis permutations, pick the one bringing r
// closest to r_ref.
Rotation canonicalize_axes(const Rotation& r, const Rotation& r_ref);

// R^M_W = R^M_c * R^c_b * (R^W_b)^-1. r_mc maps camera to Manhattan, i.e. the
// inverse of a ManhattanFrame's r_cm.
Rotation align_world(const Rotation& r_mc, const Rotation& r_cb, const Rotation& r_wb);

// R^M_b = R^M_W * R^W_b
Rotation pose_to_mw(const Rotation& r_mw, const Rotation& r_wb);

// arccos(clamp((trace - 1) / 2, -1, 1))
double angle_of(const Rotation& r);

}  // namespace mwvio
