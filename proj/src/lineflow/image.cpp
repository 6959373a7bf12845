#include "mwvio/lineflow/image.h"

#include <algorithm>
#include <cmath>

namespace mwvio {

float GrayImage::sample(double x, double y) const {
  x = std::clamp(x, 0.0, double(width - 1));
  y = std::clamp(y, 0.0, double(height - 1));
  const int x0 = std::min(int(x), width - 2 >= 0 ? width - 2 : 0);
  const int y0 = std::min(int(y), height - 2 >= 0 ? height - 2 : 0);
  const double ax = x - x0;
  const double ay = y - y0;
  const float v00 = at(x0, y0);
  const float v10 = at(std::min(x0 + 1, width - 1), y0);
  const float v01 = at(x0, std::min(y0 + 1, height - 1));
  const float v11 = at(std::min(x0 + 1, width - 1), std::min(y0 + 1, height - 1));
  return float((1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 + (1 - ax) * ay * v01 +
               ax * ay * v11);
}

Eigen::Vector2d GrayImage::gradient(double x, double y) const {
  return {0.5 * (sample(x + 1.0, y) - sample(x - 1.0, y)),
          0.5 * (sample(x, y + 1.0) - sample(x, y - 1.0))};
}

ImagePyramid build_pyramid(const GrayImage& img, int levels) {
  if (levels < 2 || levels > 5) throw TooSmall("build_pyramid: levels must be in [2, 5]");
  if (img.width < 32 || img.height < 32) throw TooSmall("build_pyramid: image smaller than 32 px");
  {
    const int w = img.width >> (levels - 1);
    const int h = img.height >> (levels - 1);
    if (w < 16 || h < 16) throw TooSmall("build_pyramid: top level smaller than 16 px");
  }
  ImagePyramid pyr;
  pyr.levels.reserve(levels);
  pyr.levels.push_back(img);
  for (int l = 1; l < levels; ++l) {
    const GrayImage& prev = pyr.levels.back();
    GrayImage next(prev.width / 2, prev.height / 2);
    for (int y = 0; y < next.height; ++y) {
      for (int x = 0; x < next.width; ++x) {
        next.at(x, y) = 0.25f * (prev.at(2 * x, 2 * y) + prev.at(2 * x + 1, 2 * y) +
                                 prev.at(2 * x, 2 * y + 1) + prev.at(2 * x + 1, 2 * y + 1));
      }
    }
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

}  // namespace mwvio
