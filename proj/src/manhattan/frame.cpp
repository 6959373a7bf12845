#include "mwvio/manhattan/frame.h"

#include <algorithm>
#include <cmath>

#include "mwvio/errors.h"

namespace mwvio {

namespace {

constexpr double kInlierAngleDeg = 2.0;

struct SphereLine {
  Eigen::Vector3d coeff;
  double length;
};

std::vector<SphereLine> sphere_lines(const std::vector<LineSegment2D>& lines,
                                     const CameraIntrinsics& intr) {
  std::vector<SphereLine> out;
  out.reserve(lines.size());
  for (const auto& seg : lines) {
    out.push_back({line_sphere_coeffs(seg, intr), seg.length()});
  }
  return out;
}

// score a full triad hypothesis by inlier line length; fills counts per axis
double score_triad(const std::vector<SphereLine>& sl, const Eigen::Matrix3d& vps,
                   const std::vector<double>& weights, std::array<int, 3>& counts) {
  const double thresh = std::sin(kInlierAngleDeg * M_PI / 180.0);
  counts = {0, 0, 0};
  double score = 0.0;
  for (size_t i = 0; i < sl.size(); ++i) {
    double best = thresh;
    int best_axis = -1;
    for (int a = 0; a < 3; ++a) {
      const double v = std::abs(sl[i].coeff.dot(vps.col(a)));
      if (v < best) {
        best = v;
        best_axis = a;
      }
    }
    if (best_axis >= 0) {
      score += sl[i].length * (weights.empty() ? 1.0 : weights[i]);
      ++counts[best_axis];
    }
  }
  return score;
}

// given vp1, sweep vp2 on the orthogonal great circle at 1 degree steps
bool best_triad_for_vp1(const std::vector<SphereLine>& sl, const Eigen::Vector3d& vp1,
                        const std::vector<double>& weights, Eigen::Matrix3d& best_vps,
                        double& best_score, std::array<int, 3>& best_counts) {
  Eigen::Vector3d e1 = vp1.unitOrthogonal();
  Eigen::Vector3d e2 = vp1.cross(e1);
  bool improved = false;
  for (int deg = 0; deg < 180; ++deg) {
    const double a = deg * M_PI / 180.0;
    Eigen::Matrix3d vps;
    vps.col(0) = vp1;
    vps.col(1) = std::cos(a) * e1 + std::sin(a) * e2;
    vps.col(2) = vps.col(0).cross(vps.col(1));
    std::array<int, 3> counts;
    const double s = score_triad(sl, vps, weights, counts);
    if (s > best_score) {
      best_score = s;
      best_vps = vps;
      best_counts = counts;
      improved = true;
    }
  }
  return improved;
}

std::optional<ManhattanFrame> finalize_frame(const Eigen::Matrix3d& vps,
                                             const std::array<int, 3>& counts,
                                             int total_inliers) {
  if (total_inliers < 6) return std::nullopt;
  int axes_supported = 0;
  for (int a = 0; a < 3; ++a)
    if (counts[a] >= 2) ++axes_supported;
  if (axes_supported < 2) return std::nullopt;
  ManhattanFrame mf;
  mf.r_cm = nearest_rotation(vps);
  mf.support = counts;
  mf.valid = true;
  return mf;
}

}  // namespace

Eigen::Vector3d line_sphere_coeffs(const LineSegment2D& seg, const CameraIntrinsics& intr) {
  const Eigen::Vector3d ps = intr.unproject(seg.start);
  const Eigen::Vector3d pe = intr.unproject(seg.end);
  const Eigen::Vector3d c = ps.cross(pe);
  if (c.norm() < 1e-12) throw DegenerateSegment("line_sphere_coeffs: endpoints coincide");
  return c.normalized();
}

std::optional<ManhattanFrame> detect_mf_2line(const std::vector<LineSegment2D>& lines,
                                              const CameraIntrinsics& intr) {
  if (lines.size() < 4) return std::nullopt;
  auto sl = sphere_lines(lines, intr);

  // hypothesize vp1 from pairs among the longest lines
  std::vector<size_t> order(sl.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return sl[a].length > sl[b].length; });
  const size_t k = std::min<size_t>(order.size(), 20);

  Eigen::Matrix3d best_vps = Eigen::Matrix3d::Identity();
  double best_score = -1.0;
  std::array<int, 3> best_counts{0, 0, 0};
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      Eigen::Vector3d vp1 = sl[order[i]].coeff.cross(sl[order[j]].coeff);
      if (vp1.norm() < 1e-9) continue;
      vp1.normalize();
      best_triad_for_vp1(sl, vp1, {}, best_vps, best_score, best_counts);
    }
  }
  if (best_score < 0.0) return std::nullopt;
  return finalize_frame(best_vps, best_counts, best_counts[0] + best_counts[1] + best_counts[2]);
}

void vote_polar_grid(PolarGrid& grid, const LineSegment2D& l1, const LineSegment2D& l2,
                     double lambda1, double lambda2, const CameraIntrinsics& intr) {
  const Eigen::Vector3d c1 = line_sphere_coeffs(l1, intr);
  const Eigen::Vector3d c2 = line_sphere_coeffs(l2, intr);
  Eigen::Vector3d p = c1.cross(c2);
  if (p.norm() < 1e-9) throw ParallelLines("vote_polar_grid: lines are parallel");
  p.normalize();
  if (p.z() < 0) p = -p;  // fold antipodes to the upper hemisphere

  const double lat = std::asin(std::clamp(p.z(), 0.0, 1.0));
  double lon = std::atan2(p.y(), p.x());
  if (lon < 0) lon += 2.0 * M_PI;
  const int i = std::min(89, int(lat / (M_PI / 2.0) * 90.0));
  const int j = std::min(359, int(lon / (2.0 * M_PI) * 360.0));

  const double cost = std::abs(l1.direction().dot(l2.direction()));
  const double theta = std::acos(std::clamp(cost, 0.0, 1.0));
  grid.bins(i, j) += (lambda1 * l1.length()) * (lambda2 * l2.length()) * std::sin(2.0 * theta);
}

std::optional<ManhattanFrame> detect_mf_polar(const std::vector<LineSegment2D>& lines,
                                              const CameraIntrinsics& intr) {
  if (lines.size() < 4) return std::nullopt;
  auto sl = sphere_lines(lines, intr);
  std::vector<double> weights(lines.size());
  for (size_t i = 0; i < lines.size(); ++i)
    weights[i] = lines[i].axis == Axis::None ? 1.0 : 10.0;

  PolarGrid grid;
  for (size_t i = 0; i < lines.size(); ++i) {
    for (size_t j = i + 1; j < lines.size(); ++j) {
      Eigen::Vector3d p = sl[i].coeff.cross(sl[j].coeff);
      if (p.norm() < 1e-9) continue;
      vote_polar_grid(grid, lines[i], lines[j], weights[i], weights[j], intr);
    }
  }
  int bi = 0, bj = 0;
  if (grid.bins.maxCoeff(&bi, &bj) <= 0.0) return std::nullopt;

  const double lat = (bi + 0.5) * (M_PI / 2.0) / 90.0;
  const double lon = (bj + 0.5) * (2.0 * M_PI) / 360.0;
  const Eigen::Vector3d vp1(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                            std::sin(lat));

  Eigen::Matrix3d best_vps = Eigen::Matrix3d::Identity();
  double best_score = -1.0;
  std::array<int, 3> best_counts{0, 0, 0};
  if (!best_triad_for_vp1(sl, vp1, weights, best_vps, best_score, best_counts))
    return std::nullopt;
  return finalize_frame(best_vps, best_counts, best_counts[0] + best_counts[1] + best_counts[2]);
}

Rotation refine_mf(const Rotation& r_init, const std::vector<LineSegment2D>& lines,
                   const ClassifiedLines& classified, const CameraIntrinsics& intr) {
  size_t total = 0;
  int axes = 0;
  for (int a = 0; a < 3; ++a) {
    total += classified.per_axis[a].size();
    if (!classified.per_axis[a].empty()) ++axes;
  }
  if (total < 3 || axes < 2)
    throw InsufficientConstraints("refine_mf: need at least 3 lines over 2 axes");

  Rotation r = r_init;
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (int a = 0; a < 3; ++a) {
      Eigen::Vector3d ea = Eigen::Vector3d::Zero();
      ea[a] = 1.0;
      for (size_t idx : classified.per_axis[a]) {
        const Eigen::Vector3d c = line_sphere_coeffs(lines[idx], intr);
        const double w = lines[idx].length();
        const double res = c.dot(r * ea);
        // d(c . R exp([d]x) ea)/dd = (ea x R^T c)^T
        const Eigen::Vector3d j = ea.cross(r.matrix().transpose() * c);
        h += w * j * j.transpose();
        b += w * j * res;
      }
    }
    Eigen::Vector3d delta = h.ldlt().solve(-b);
    if (!delta.allFinite()) break;
    r = r * Rotation::exp(delta);
    if (delta.norm() < 1e-8) break;
  }
  return nearest_rotation(r.matrix());
}

ClassifiedLines classify_lines(const Rotation& r_cm, std::vector<LineSegment2D>& lines,
                               const CameraIntrinsics& intr, double angle_thresh_deg) {
  ClassifiedLines out;
  const double thresh = std::sin(angle_thresh_deg * M_PI / 180.0);
  for (size_t i = 0; i < lines.size(); ++i) {
    const Eigen::Vector3d c = line_sphere_coeffs(lines[i], intr);
    double best = thresh;
    int best_axis = -1;
    for (int a = 0; a < 3; ++a) {
      const double v = std::abs(c.dot(r_cm.col(a)));
      if (v < best) {
        best = v;
        best_axis = a;
      }
    }
    if (best_axis >= 0) {
      out.per_axis[best_axis].push_back(i);
      lines[i].axis = Axis(best_axis);
    } else {
      out.residue.push_back(i);
      lines[i].axis = Axis::None;
    }
  }
  return out;
}

Rotation canonicalize_axes(const Rotation& r, const Rotation& r_ref) {
  static const std::vector<Eigen::Matrix3d> perms = [] {
    std::vector<Eigen::Matrix3d> out;
    const int idx[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& pi : idx) {
      for (int signs = 0; signs < 8; ++signs) {
        Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
        for (int c = 0; c < 3; ++c) p(pi[c], c) = (signs >> c) & 1 ? -1.0 : 1.0;
        if (p.determinant() > 0) out.push_back(p);
      }
    }
    return out;
  }();

  double best = -1e18;
  Eigen::Matrix3d best_m = r.matrix();
  for (const auto& p : perms) {
    const Eigen::Matrix3d cand = r.matrix() * p;
    const double t = (r_ref.matrix().transpose() * cand).trace();
    if (t > best) {
      best = t;
      best_m = cand;
    }
  }
  return Rotation::unchecked(best_m);
}

Rotation align_world(const Rotation& r_mc, const Rotation& r_cb, const Rotation& r_wb) {
  return r_mc * r_cb * r_wb.inverse();
}

Rotation pose_to_mw(const Rotation& r_mw, const Rotation& r_wb) { return r_mw * r_wb; }

double angle_of(const Rotation& r) { return rotation_angle(r); }

}  // namespace mwvio
