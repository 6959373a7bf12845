#include "mwvio/lineflow/detector.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mwvio {

namespace {

struct GradientField {
  int width = 0, height = 0;
  std::vector<float> gx, gy, mag;

  float magnitude(int x, int y) const { return mag[size_t(y) * width + x]; }
  Eigen::Vector2d grad(int x, int y) const {
    const size_t i = size_t(y) * width + x;
    return {gx[i], gy[i]};
  }
};

GrayImage smooth3x3(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  GrayImage tmp(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, img.width - 1);
      tmp.at(x, y) = 0.25f * (img.at(xm, y) + 2.0f * img.at(x, y) + img.at(xp, y));
    }
  }
  for (int y = 0; y < img.height; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = 0.25f * (tmp.at(x, ym) + 2.0f * tmp.at(x, y) + tmp.at(x, yp));
    }
  }
  return out;
}

GradientField sobel(const GrayImage& img) {
  GradientField g;
  g.width = img.width;
  g.height = img.height;
  g.gx.assign(size_t(img.width) * img.height, 0.0f);
  g.gy.assign(size_t(img.width) * img.height, 0.0f);
  g.mag.assign(size_t(img.width) * img.height, 0.0f);
  for (int y = 1; y < img.height - 1; ++y) {
    for (int x = 1; x < img.width - 1; ++x) {
      const float dx = (img.at(x + 1, y - 1) + 2.0f * img.at(x + 1, y) + img.at(x + 1, y + 1) -
                        img.at(x - 1, y - 1) - 2.0f * img.at(x - 1, y) - img.at(x - 1, y + 1)) /
                       8.0f;
      const float dy = (img.at(x - 1, y + 1) + 2.0f * img.at(x, y + 1) + img.at(x + 1, y + 1) -
                        img.at(x - 1, y - 1) - 2.0f * img.at(x, y - 1) - img.at(x + 1, y - 1)) /
                       8.0f;
      const size_t i = size_t(y) * img.width + x;
      g.gx[i] = dx;
      g.gy[i] = dy;
      g.mag[i] = std::sqrt(dx * dx + dy * dy);
    }
  }
  return g;
}

struct Anchor {
  int x, y;
  float mag;
};

std::vector<Anchor> find_anchors(const GradientField& g, double anchor_threshold,
                                 const std::vector<uint8_t>* mask) {
  std::vector<Anchor> anchors;
  for (int y = 1; y < g.height - 1; ++y) {
    for (int x = 1; x < g.width - 1; ++x) {
      const float m = g.magnitude(x, y);
      if (m < anchor_threshold) continue;
      if (mask && (*mask)[size_t(y) * g.width + x]) continue;
      const Eigen::Vector2d gr = g.grad(x, y);
      bool is_max;
      if (std::abs(gr.x()) >= std::abs(gr.y())) {
        is_max = m >= g.magnitude(x - 1, y) && m >= g.magnitude(x + 1, y);
      } else {
        is_max = m >= g.magnitude(x, y - 1) && m >= g.magnitude(x, y + 1);
      }
      if (is_max) anchors.push_back({x, y, m});
    }
  }
  std::sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) {
    if (a.mag != b.mag) return a.mag > b.mag;
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return anchors;
}

// Walk from (x0, y0) along dir, chaining pixels above the gradient threshold.
std::vector<Eigen::Vector2i> walk(const GradientField& g, std::vector<uint8_t>& visited,
                                  const std::vector<uint8_t>* mask, int x0, int y0,
                                  Eigen::Vector2d dir, double gradient_threshold) {
  std::vector<Eigen::Vector2i> chain;
  int x = x0, y = y0;
  for (int step = 0; step < 4096; ++step) {
    double best_mag = -1.0;
    int bx = 0, by = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const double fwd = dir.x() * dx + dir.y() * dy;
        if (fwd < 0.3) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 1 || ny < 1 || nx >= g.width - 1 || ny >= g.height - 1) continue;
        const size_t i = size_t(ny) * g.width + nx;
        if (visited[i]) continue;
        if (mask && (*mask)[i]) continue;
        const float m = g.mag[i];
        if (m < gradient_threshold) continue;
        if (m > best_mag) {
          best_mag = m;
          bx = dx;
          by = dy;
        }
      }
    }
    if (best_mag < 0.0) break;
    x += bx;
    y += by;
    dir = Eigen::Vector2d(bx, by).normalized();
    visited[size_t(y) * g.width + x] = 1;
    chain.push_back({x, y});
  }
  return chain;
}

struct RunFit {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  Eigen::Vector2i first{0, 0}, last{0, 0};

  void add(const Eigen::Vector2i& p) {
    if (n == 0) first = p;
    last = p;
    sx += p.x();
    sy += p.y();
    sxx += double(p.x()) * p.x();
    sxy += double(p.x()) * p.y();
    syy += double(p.y()) * p.y();
    ++n;
  }

  void line(Eigen::Vector2d& centroid, Eigen::Vector2d& dir) const {
    centroid = {sx / n, sy / n};
    Eigen::Matrix2d cov;
    cov << sxx / n - centroid.x() * centroid.x(), sxy / n - centroid.x() * centroid.y(),
        sxy / n - centroid.x() * centroid.y(), syy / n - centroid.y() * centroid.y();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    dir = es.eigenvectors().col(1);  // largest eigenvalue
  }

  double deviation(const Eigen::Vector2i& p) const {
    Eigen::Vector2d c, d;
    line(c, d);
    const Eigen::Vector2d r(p.x() - c.x(), p.y() - c.y());
    return std::abs(-d.y() * r.x() + d.x() * r.y());
  }
};

LineSegment2D finalize_run(const RunFit& run) {
  Eigen::Vector2d c, d;
  run.line(c, d);
  const Eigen::Vector2d a(run.first.x(), run.first.y());
  const Eigen::Vector2d b(run.last.x(), run.last.y());
  LineSegment2D seg;
  seg.start = c + d.dot(a - c) * d;
  seg.end = c + d.dot(b - c) * d;
  return seg;
}

void mark_band(const GradientField& g, std::vector<uint8_t>& visited,
               const std::vector<Eigen::Vector2i>& chain, int half_width) {
  for (const auto& p : chain) {
    Eigen::Vector2d gr = g.grad(p.x(), p.y());
    if (gr.norm() < 1e-9) continue;
    gr.normalize();
    for (int k = -half_width; k <= half_width; ++k) {
      const int nx = p.x() + int(std::lround(k * gr.x()));
      const int ny = p.y() + int(std::lround(k * gr.y()));
      if (nx < 0 || ny < 0 || nx >= g.width || ny >= g.height) continue;
      visited[size_t(ny) * g.width + nx] = 1;
    }
  }
}

std::vector<LineSegment2D> extract(const GrayImage& img, const GradientField& g,
                                   double gradient_threshold, double anchor_threshold,
                                   double min_length, const std::vector<uint8_t>* mask) {
  std::vector<uint8_t> visited(size_t(img.width) * img.height, 0);
  const auto anchors = find_anchors(g, anchor_threshold, mask);
  std::vector<LineSegment2D> segments;

  for (const auto& a : anchors) {
    if (visited[size_t(a.y) * g.width + a.x]) continue;
    visited[size_t(a.y) * g.width + a.x] = 1;
    const Eigen::Vector2d gr = g.grad(a.x, a.y);
    if (gr.norm() < 1e-9) continue;
    const Eigen::Vector2d edge_dir = Eigen::Vector2d(-gr.y(), gr.x()).normalized();

    auto fwd = walk(g, visited, mask, a.x, a.y, edge_dir, gradient_threshold);
    auto bwd = walk(g, visited, mask, a.x, a.y, -edge_dir, gradient_threshold);
    std::vector<Eigen::Vector2i> chain;
    chain.reserve(fwd.size() + bwd.size() + 1);
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) chain.push_back(*it);
    chain.push_back({a.x, a.y});
    for (const auto& p : fwd) chain.push_back(p);
    if (chain.size() < 8) continue;

    RunFit run;
    size_t i = 0;
    for (; i < chain.size(); ++i) {
      if (run.n >= 5 && run.deviation(chain[i]) > 1.0) {
        LineSegment2D seg = finalize_run(run);
        if (seg.length() >= min_length) segments.push_back(seg);
        run = RunFit();
      }
      run.add(chain[i]);
    }
    if (run.n >= 5) {
      LineSegment2D seg = finalize_run(run);
      if (seg.length() >= min_length) segments.push_back(seg);
    }

    // suppress the parallel flank of wide strokes
    mark_band(g, visited, chain, 2);
  }
  return segments;
}

std::vector<LineSegment2D> distribute_grid(std::vector<LineSegment2D> segments, int width,
                                           int height, int target_count) {
  if (int(segments.size()) <= target_count) return segments;
  const int cells = 8;
  std::vector<std::vector<size_t>> grid(cells * cells);
  for (size_t i = 0; i < segments.size(); ++i) {
    const Eigen::Vector2d m = segments[i].midpoint();
    const int cx = std::clamp(int(m.x() / width * cells), 0, cells - 1);
    const int cy = std::clamp(int(m.y() / height * cells), 0, cells - 1);
    grid[cy * cells + cx].push_back(i);
  }
  for (auto& cell : grid) {
    std::sort(cell.begin(), cell.end(),
              [&](size_t a, size_t b) { return segments[a].length() > segments[b].length(); });
  }
  std::vector<LineSegment2D> out;
  out.reserve(target_count);
  for (size_t round = 0; int(out.size()) < target_count; ++round) {
    bool any = false;
    for (const auto& cell : grid) {
      if (round < cell.size()) {
        any = true;
        out.push_back(segments[cell[round]]);
        if (int(out.size()) >= target_count) break;
      }
    }
    if (!any) break;
  }
  return out;
}

std::vector<LineSegment2D> detect_impl(const GrayImage& img, const DetectorParams& p,
                                       long first_id, const std::vector<uint8_t>* mask) {
  const GrayImage smoothed = smooth3x3(img);
  const GradientField g = sobel(smoothed);

  auto segments = extract(smoothed, g, p.gradient_threshold, p.anchor_threshold, p.min_length, mask);
  if (int(segments.size()) < p.target_count) {
    auto retry = extract(smoothed, g, 0.5 * p.gradient_threshold,
                         std::min(p.anchor_threshold, 2.0 * 0.5 * p.gradient_threshold),
                         p.min_length, mask);
    if (retry.size() > segments.size()) segments = std::move(retry);
  }
  segments = distribute_grid(std::move(segments), img.width, img.height, p.target_count);
  for (size_t i = 0; i < segments.size(); ++i) {
    segments[i].id = first_id + long(i);
    segments[i].resample();
  }
  return segments;
}

}  // namespace

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  const double t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

std::vector<LineSegment2D> detect_lines(const GrayImage& img, const DetectorParams& p,
                                        long first_id) {
  return detect_impl(img, p, first_id, nullptr);
}

std::vector<LineSegment2D> merge_collinear(std::vector<LineSegment2D> lines) {
  constexpr double kAngleTol = 3.0 * M_PI / 180.0;
  constexpr double kOffsetTol = 2.0;
  constexpr double kGapTol = 10.0;

  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    for (size_t i = 0; i < lines.size() && !merged_any; ++i) {
      for (size_t j = i + 1; j < lines.size() && !merged_any; ++j) {
        const LineSegment2D& a = lines[i];
        const LineSegment2D& b = lines[j];
        const double cosang = std::abs(a.direction().dot(b.direction()));
        if (std::acos(std::clamp(cosang, 0.0, 1.0)) >= kAngleTol) continue;
        const double off = std::max(a.distance_to(b.midpoint()), b.distance_to(a.midpoint()));
        if (off >= kOffsetTol) continue;
        // gap between projected intervals along the longer segment
        const LineSegment2D& base = a.length() >= b.length() ? a : b;
        const Eigen::Vector2d d = base.direction();
        const double a1 = d.dot(a.start - base.start), a2 = d.dot(a.end - base.start);
        const double b1 = d.dot(b.start - base.start), b2 = d.dot(b.end - base.start);
        const double alo = std::min(a1, a2), ahi = std::max(a1, a2);
        const double blo = std::min(b1, b2), bhi = std::max(b1, b2);
        const double gap = std::max(0.0, std::max(blo - ahi, alo - bhi));
        if (gap >= kGapTol) continue;

        const double lo = std::min(alo, blo), hi = std::max(ahi, bhi);
        LineSegment2D m;
        m.start = base.start + lo * d;
        m.end = base.start + hi * d;
        m.id = base.id;
        m.axis = base.axis;
        lines[i] = m;
        lines.erase(lines.begin() + j);
        merged_any = true;
      }
    }
  }
  return lines;
}

LineSegment2D extend_endpoints(const LineSegment2D& line, const GrayImage& img) {
  LineSegment2D seg = line;
  seg.resample(1.0);
  double mean_grad = 0.0;
  for (const auto& s : seg.samples) mean_grad += img.gradient(s.x(), s.y()).norm();
  mean_grad /= double(seg.samples.size());
  if (mean_grad < 1e-6) return line;

  const Eigen::Vector2d d = seg.direction();
  auto march = [&](Eigen::Vector2d p, const Eigen::Vector2d& dir) {
    for (int k = 0; k < 20; ++k) {
      const Eigen::Vector2d q = p + dir;
      if (!img.contains(q.x(), q.y(), 1.0)) break;
      if (img.gradient(q.x(), q.y()).norm() < 0.7 * mean_grad) break;
      p = q;
    }
    return p;
  };
  LineSegment2D out = line;
  out.start = march(seg.start, -d);
  out.end = march(seg.end, d);
  out.resample();
  return out;
}

std::vector<LineSegment2D> replenish(const std::vector<LineSegment2D>& tracked,
                                     const GrayImage& img, const DetectorParams& p) {
  if (int(tracked.size()) >= p.target_count) return tracked;

  constexpr double kBand = 8.0;
  std::vector<uint8_t> mask(size_t(img.width) * img.height, 0);
  for (const auto& line : tracked) {
    const double len = line.length();
    const Eigen::Vector2d d = line.direction();
    for (double t = -kBand; t <= len + kBand; t += 2.0) {
      const Eigen::Vector2d c = line.start + t * d;
      const int x0 = std::max(0, int(c.x() - kBand)), x1 = std::min(img.width - 1, int(c.x() + kBand) + 1);
      const int y0 = std::max(0, int(c.y() - kBand)), y1 = std::min(img.height - 1, int(c.y() + kBand) + 1);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) mask[size_t(y) * img.width + x] = 1;
    }
  }

  long next_id = 0;
  for (const auto& line : tracked) next_id = std::max(next_id, line.id + 1);

  DetectorParams pm = p;
  pm.target_count = p.target_count - int(tracked.size());
  auto fresh = detect_impl(img, pm, next_id, &mask);

  std::vector<LineSegment2D> out = tracked;
  for (auto& seg : fresh) {
    bool clear = true;
    for (const auto& old : tracked) {
      for (const auto& s : seg.samples) {
        if (point_segment_distance(s, old.start, old.end) < kBand) {
          clear = false;
          break;
        }
      }
      if (!clear) break;
    }
    if (clear && int(out.size()) < p.target_count) out.push_back(seg);
  }
  return out;
}

}  // namespace mwvio
