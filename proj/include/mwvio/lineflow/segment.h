#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mwvio {

enum class Axis : int { None = -1, X = 0, Y = 1, Z = 2 };

struct LineSegment2D {
  Eigen::Vector2d start{0, 0};
  Eigen::Vector2d end{0, 0};
  std::vector<Eigen::Vector2d> samples;  // on-segment points at ~2 px spacing
  long id = -1;
  Axis axis = Axis::None;

  double length() const { return (end - start).norm(); }
  Eigen::Vector2d direction() const { return (end - start).normalized(); }
  Eigen::Vector2d midpoint() const { return 0.5 * (start + end); }

  // Rebuild samples from start to end inclusive at the given spacing.
  void resample(double spacing = 2.0);

  // perpendicular distance of a point to the infinite carrier line
  double distance_to(const Eigen::Vector2d& p) const;
};

}  // namespace mwvio
