#include "mwvio/lineflow/tracker.h"

#include <cmath>

namespace mwvio {

namespace {

constexpr double kConvergeTol = 1e-3;
constexpr double kMaxMeanResidual = 20.0;
constexpr double kRankTol = 1e-10;

// exact warp: rotate by g3 and scale by (1 + g4) about the start point,
// then translate the start point by (g1, g2)
Eigen::Vector2d warp_impl(const Eigen::Vector2d& p, const Eigen::Vector2d& s,
                          const LineMotion& g) {
  const double c = std::cos(g.g3), sn = std::sin(g.g3);
  const double du = p.x() - s.x(), dv = p.y() - s.y();
  const double k = 1.0 + g.g4;
  return {s.x() + g.g1 + k * (c * du - sn * dv), s.y() + g.g2 + k * (sn * du + c * dv)};
}

}  // namespace

Eigen::Vector2d warp_point(const Eigen::Vector2d& p, const Eigen::Vector2d& start,
                           const LineMotion& g) {
  return warp_impl(p, start, g);
}

TrackResult track_line(const ImagePyramid& prev, const ImagePyramid& cur,
                       const LineSegment2D& line, int max_iters) {
  TrackResult result;
  result.line = line;
  result.status = TrackStatus::Diverged;

  const int n_levels = std::min(prev.level_count(), cur.level_count());
  if (n_levels < 1) return result;
  if (line.length() < 4.0) return result;

  LineMotion g;  // tracked at the current level's scale
  bool solved_any = false;

  for (int level = n_levels - 1; level >= 0; --level) {
    const double scale = 1.0 / double(1 << level);
    const GrayImage& ip = prev.level(level);
    const GrayImage& ic = cur.level(level);

    // level-scaled line, re-spaced once per level at ~2 px spacing
    LineSegment2D lvl;
    lvl.start = line.start * scale;
    lvl.end = line.end * scale;
    lvl.resample(2.0);
    if (lvl.samples.size() < 5) continue;

    std::vector<double> intensity(lvl.samples.size());
    std::vector<bool> valid(lvl.samples.size());
    for (size_t i = 0; i < lvl.samples.size(); ++i) {
      valid[i] = ip.contains(lvl.samples[i].x(), lvl.samples[i].y(), 1.0);
      intensity[i] = valid[i] ? ip.sample(lvl.samples[i].x(), lvl.samples[i].y()) : 0.0;
    }

    for (int iter = 0; iter < max_iters; ++iter) {
      Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
      Eigen::Vector4d b = Eigen::Vector4d::Zero();
      int rows = 0;
      const double c = std::cos(g.g3), sn = std::sin(g.g3);
      const double k = 1.0 + g.g4;
      for (size_t i = 0; i < lvl.samples.size(); ++i) {
        if (!valid[i]) continue;
        const Eigen::Vector2d w = warp_impl(lvl.samples[i], lvl.start, g);
        if (!ic.contains(w.x(), w.y(), 1.0)) continue;
        const Eigen::Vector2d grad = ic.gradient(w.x(), w.y());
        const double du = lvl.samples[i].x() - lvl.start.x();
        const double dv = lvl.samples[i].y() - lvl.start.y();
        Eigen::Matrix<double, 2, 4> jw;
        jw << 1, 0, k * (-sn * du - c * dv), c * du - sn * dv,
              0, 1, k * (c * du - sn * dv), sn * du + c * dv;
        const Eigen::Vector4d row = jw.transpose() * grad;
        const double r = intensity[i] - ic.sample(w.x(), w.y());
        h += row * row.transpose();
        b += row * r;
        ++rows;
      }
      if (rows < 5) break;

      Eigen::JacobiSVD<Eigen::Matrix4d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
      if (svd.singularValues()(3) < kRankTol * svd.singularValues()(0)) {
        return result;  // aperture-degenerate: no reliable solution
      }
      const Eigen::Vector4d delta = svd.solve(b);
      g.g1 += delta[0];
      g.g2 += delta[1];
      g.g3 += delta[2];
      g.g4 += delta[3];
      solved_any = true;
      if (std::abs(g.g3) >= M_PI / 2) return result;
      if (delta.norm() < kConvergeTol) break;
    }

    // per-level motion bound
    const double bound = 0.5 * ic.width / 8.0;
    if (std::abs(g.g1) > bound || std::abs(g.g2) > bound) return result;

    if (level > 0) {
      g.g1 *= 2.0;
      g.g2 *= 2.0;
    }
  }

  if (!solved_any) return result;

  // evaluate at full resolution
  LineSegment2D full = line;
  full.resample(2.0);
  const GrayImage& ip0 = prev.level(0);
  const GrayImage& ic0 = cur.level(0);
  double abs_residual = 0.0;
  int n_eval = 0, n_out = 0;
  for (const auto& s : full.samples) {
    const Eigen::Vector2d w = warp_impl(s, full.start, g);
    if (!ic0.contains(w.x(), w.y(), 1.0)) {
      ++n_out;
      continue;
    }
    if (!ip0.contains(s.x(), s.y(), 1.0)) continue;
    abs_residual += std::abs(ip0.sample(s.x(), s.y()) - ic0.sample(w.x(), w.y()));
    ++n_eval;
  }

  LineSegment2D tracked = line;
  tracked.start = warp_impl(line.start, line.start, g);
  tracked.end = warp_impl(line.end, line.start, g);
  tracked.resample();
  result.line = tracked;
  result.motion = g;

  const bool ends_out = !ic0.contains(tracked.start.x(), tracked.start.y(), 1.0) ||
                        !ic0.contains(tracked.end.x(), tracked.end.y(), 1.0);
  if (ends_out || n_out > int(full.samples.size()) / 4) {
    result.status = TrackStatus::OutOfBounds;
    return result;
  }
  if (n_eval == 0 || abs_residual / n_eval > kMaxMeanResidual) {
    result.status = TrackStatus::Diverged;
    return result;
  }
  result.status = TrackStatus::Tracked;
  return result;
}

}  // namespace mwvio
