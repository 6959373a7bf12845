#include "mwvio/lineflow/segment.h"

#include <cmath>

namespace mwvio {

void LineSegment2D::resample(double spacing) {
  samples.clear();
  const double len = length();
  if (len < 1e-9) {
    samples.push_back(start);
    return;
  }
  const int n = std::max(2, int(std::ceil(len / spacing)) + 1);
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / (n - 1);
    samples.push_back(start + t * (end - start));
  }
}

double LineSegment2D::distance_to(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d d = direction();
  const Eigen::Vector2d n(-d.y(), d.x());
  return std::abs(n.dot(p - start));
}

}  // namespace mwvio
