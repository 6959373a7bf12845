#include "mwvio/pipeline/raster.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mwvio/lineflow/detector.h"

namespace mwvio {

GrayImage render_segments(int width, int height, const std::vector<LineSegment2D>& segments,
                          const RasterParams& p) {
  GrayImage img(width, height, p.background);
  if (p.noise_sigma > 0.0) {
    std::mt19937_64 gen(p.noise_seed);
    std::normal_distribution<double> noise(0.0, p.noise_sigma);
    for (auto& v : img.data) v = float(std::clamp(double(v) + noise(gen), 0.0, 255.0));
  }

  const double reach = p.half_width + 1.0;
  for (const auto& seg : segments) {
    const int x0 = std::max(0, int(std::floor(std::min(seg.start.x(), seg.end.x()) - reach)));
    const int x1 = std::min(width - 1, int(std::ceil(std::max(seg.start.x(), seg.end.x()) + reach)));
    const int y0 = std::max(0, int(std::floor(std::min(seg.start.y(), seg.end.y()) - reach)));
    const int y1 = std::min(height - 1, int(std::ceil(std::max(seg.start.y(), seg.end.y()) + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double d = point_segment_distance({double(x), double(y)}, seg.start, seg.end);
        // linear 1 px coverage ramp around the stroke core
        const double alpha = std::clamp(p.half_width + 0.5 - d, 0.0, 1.0);
        if (alpha <= 0.0) continue;
        float& v = img.at(x, y);
        v = float(alpha * p.foreground + (1.0 - alpha) * v);
      }
    }
  }
  return img;
}

}  // namespace mwvio
