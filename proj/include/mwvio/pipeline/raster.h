#pragma once

#include <vector>

#include "mwvio/lineflow/image.h"
#include "mwvio/lineflow/segment.h"

namespace mwvio {

struct RasterParams {
  float background = 225.0f;
  float foreground = 30.0f;
  double half_width = 1.5;   // 3 px wide core
  double noise_sigma = 2.0;  // background noise
  unsigned noise_seed = 0;
};

// Anti-aliased dark segments on a bright noisy background. Deterministic for
// a fixed seed.
GrayImage render_segments(int width, int height, const std::vector<LineSegment2D>& segments,
                          const RasterParams& p);

}  // namespace mwvio
