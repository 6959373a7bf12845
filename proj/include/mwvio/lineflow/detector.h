#pragma once

#include <vector>

#include "mwvio/lineflow/image.h"
#include "mwvio/lineflow/segment.h"

namespace mwvio {

struct DetectorParams {
  double gradient_threshold = 5.0;  // intensity per px, after Sobel normalization
  double anchor_threshold = 10.0;
  double min_length = 20.0;  // px
  int target_count = 100;
};

// Gradient-anchor line segment detector. Sobel gradients, anchor extraction,
// edge walking with least-squares segment fitting (split at 1 px deviation).
// If fewer than target_count segments are found the gradient threshold is
// halved once and extraction repeated. Results are spread over an 8x8
// occupancy grid. Ids are assigned from first_id upward.
std::vector<LineSegment2D> detect_lines(const GrayImage& img, const DetectorParams& p,
                                        long first_id = 0);

// Segments closer than 3 deg in angle, 2 px in perpendicular offset and 10 px
// in endpoint gap are merged into one segment spanning the extreme
// projections; the longer parent keeps its id. Idempotent.
std::vector<LineSegment2D> merge_collinear(std::vector<LineSegment2D> lines);

// March both endpoints outward in 1 px steps while the gradient magnitude
// stays above 0.7x the line's mean edge gradient, at most 20 px per end.
LineSegment2D extend_endpoints(const LineSegment2D& line, const GrayImage& img);

// Top up the tracked set to target_count with fresh detections, keeping an
// 8 px exclusion band around existing lines.
std::vector<LineSegment2D> replenish(const std::vector<LineSegment2D>& tracked,
                                     const GrayImage& img, const DetectorParams& p);

// distance from p to the closed segment [a, b]
double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b);

}  // namespace mwvio
