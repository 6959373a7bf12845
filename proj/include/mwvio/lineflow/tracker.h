#pragma once

#include "mwvio/lineflow/image.h"
#include "mwvio/lineflow/segment.h"

namespace mwvio {

// Motion of a line between two frames: start-point translation (g1, g2),
// rotation about the start point (g3, rad) and relative length change (g4).
struct LineMotion {
  double g1 = 0.0, g2 = 0.0, g3 = 0.0, g4 = 0.0;
};

enum class TrackStatus { Tracked, Diverged, OutOfBounds };

struct TrackResult {
  LineSegment2D line;
  LineMotion motion;
  TrackStatus status = TrackStatus::Diverged;
};

// Warp of a point p on the original line given the motion and the line start.
Eigen::Vector2d warp_point(const Eigen::Vector2d& p, const Eigen::Vector2d& start,
                           const LineMotion& g);

// Coarse-to-fine Gauss-Newton on the stacked per-sample flow system. Each
// sample contributes one row pairing the spatial gradient with the 2x4 motion
// matrix [[1,0,-(v-vs),(u-us)],[0,1,(u-us),(v-vs)]] against the temporal
// intensity difference. Rank-deficient systems (straight line, uniform
// gradient) yield Diverged rather than a spurious solution.
TrackResult track_line(const ImagePyramid& prev, const ImagePyramid& cur,
                       const LineSegment2D& line, int max_iters = 10);

}  // namespace mwvio
