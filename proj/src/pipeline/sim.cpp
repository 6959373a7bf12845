#include "mwvio/pipeline/sim.h"

#include <cmath>
#include <random>

#include "mwvio/errors.h"
#include "mwvio/pipeline/raster.h"

namespace mwvio {

namespace {

constexpr double kRoomHalf = 5.0;   // walls at +-5 m
constexpr double kRoomHeight = 3.0;
constexpr double kNearPlane = 0.2;
constexpr double kMinSegmentPx = 20.0;

Eigen::Vector3d wall_point(std::mt19937_64& gen, int wall, double u, double z) {
  switch (wall) {
    case 0: return {u, kRoomHalf, z};
    case 1: return {u, -kRoomHalf, z};
    case 2: return {kRoomHalf, u, z};
    default: return {-kRoomHalf, u, z};
  }
  (void)gen;
}

Scene make_scene(const SimConfig& cfg, std::mt19937_64& gen) {
  Scene scene;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(gen); };
  long next_id = 0;

  // vertical (Z) segments on the walls
  for (int i = 0; i < cfg.n_lines_per_axis; ++i) {
    const int wall = i % 4;
    const double u = uniform(-4.5, 4.5);
    const double z0 = uniform(0.0, 0.7);
    const double z1 = uniform(2.3, kRoomHeight);
    scene.lines.push_back(
        {next_id++, Axis::Z, wall_point(gen, wall, u, z0), wall_point(gen, wall, u, z1)});
  }
  // X-aligned segments on the y-walls, floor and ceiling
  for (int i = 0; i < cfg.n_lines_per_axis; ++i) {
    const double x0 = uniform(-4.5, 1.0);
    const double x1 = x0 + uniform(2.0, 3.5);
    double y, z;
    if (i % 2 == 0) {
      y = (i % 4 == 0) ? kRoomHalf : -kRoomHalf;
      z = uniform(0.3, 2.7);
    } else {
      y = uniform(-4.0, 4.0);
      z = (i % 4 == 1) ? 0.0 : kRoomHeight;
    }
    scene.lines.push_back({next_id++, Axis::X, {x0, y, z}, {x1, y, z}});
  }
  // Y-aligned segments on the x-walls, floor and ceiling
  for (int i = 0; i < cfg.n_lines_per_axis; ++i) {
    const double y0 = uniform(-4.5, 1.0);
    const double y1 = y0 + uniform(2.0, 3.5);
    double x, z;
    if (i % 2 == 0) {
      x = (i % 4 == 0) ? kRoomHalf : -kRoomHalf;
      z = uniform(0.3, 2.7);
    } else {
      x = uniform(-4.0, 4.0);
      z = (i % 4 == 1) ? 0.0 : kRoomHeight;
    }
    scene.lines.push_back({next_id++, Axis::Y, {x, y0, z}, {x, y1, z}});
  }
  // points on walls, floor and ceiling
  for (int i = 0; i < cfg.n_points; ++i) {
    Eigen::Vector3d p;
    const int face = i % 6;
    const double u = uniform(-4.8, 4.8), v = uniform(-4.8, 4.8);
    const double z = uniform(0.1, kRoomHeight - 0.1);
    switch (face) {
      case 0: p = {u, kRoomHalf, z}; break;
      case 1: p = {u, -kRoomHalf, z}; break;
      case 2: p = {kRoomHalf, u, z}; break;
      case 3: p = {-kRoomHalf, u, z}; break;
      case 4: p = {u, v, 0.0}; break;
      default: p = {u, v, kRoomHeight}; break;
    }
    scene.points.push_back({next_id++, p});
  }
  return scene;
}

Rotation look_rotation(const Eigen::Vector3d& view_dir) {
  const Eigen::Vector3d z = view_dir.normalized();
  Eigen::Vector3d x = z.cross(Eigen::Vector3d(0, 0, 1));
  if (x.norm() < 1e-6) x = Eigen::Vector3d(1, 0, 0);
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return Rotation::unchecked(m);
}

RigidTransform trajectory_pose(const SimConfig& cfg, int i) {
  const double t = double(i) / std::max(1, cfg.n_frames - 1);
  if (cfg.trajectory == "corridor") {
    const double x = -cfg.length / 2.0 + cfg.length * t;
    const double y = 0.5 * std::sin(2.0 * M_PI * t);
    const Eigen::Vector3d pos(x, y, 1.5);
    const Eigen::Vector3d vel(cfg.length, 0.5 * 2.0 * M_PI * std::cos(2.0 * M_PI * t), 0.0);
    const double pitch = 8.0 * M_PI / 180.0;
    const Eigen::Vector3d view =
        std::cos(pitch) * vel.normalized() - std::sin(pitch) * Eigen::Vector3d(0, 0, 1);
    return {look_rotation(view), pos};
  }
  if (cfg.trajectory != "circle") throw ConfigInvalid("unknown trajectory: " + cfg.trajectory);
  const double theta = 2.0 * M_PI * t;
  const Eigen::Vector3d pos(cfg.radius * std::cos(theta), cfg.radius * std::sin(theta), 1.5);
  const Eigen::Vector3d tangent(-std::sin(theta), std::cos(theta), 0.0);
  const double pitch = 10.0 * M_PI / 180.0;
  const Eigen::Vector3d view =
      std::cos(pitch) * tangent - std::sin(pitch) * Eigen::Vector3d(0, 0, 1);
  return {look_rotation(view), pos};
}

// clip a camera-frame segment to the near plane and to the image rectangle
std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> project_segment(
    const RigidTransform& t_wc, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
    const CameraIntrinsics& intr, int width, int height) {
  Eigen::Vector3d pa = t_wc.inverse() * a;
  Eigen::Vector3d pb = t_wc.inverse() * b;
  if (pa.z() < kNearPlane && pb.z() < kNearPlane) return std::nullopt;
  if (pa.z() < kNearPlane || pb.z() < kNearPlane) {
    const double s = (kNearPlane - pa.z()) / (pb.z() - pa.z());
    const Eigen::Vector3d cut = pa + s * (pb - pa);
    if (pa.z() < kNearPlane) pa = cut;
    else pb = cut;
  }
  Eigen::Vector2d ua = intr.to_pixels({pa.x() / pa.z(), pa.y() / pa.z()});
  Eigen::Vector2d ub = intr.to_pixels({pb.x() / pb.z(), pb.y() / pb.z()});

  // Liang-Barsky against [1, w-2] x [1, h-2]
  const double xmin = 1.0, ymin = 1.0, xmax = width - 2.0, ymax = height - 2.0;
  double t0 = 0.0, t1 = 1.0;
  const Eigen::Vector2d d = ub - ua;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {ua.x() - xmin, xmax - ua.x(), ua.y() - ymin, ymax - ua.y()};
  for (int k = 0; k < 4; ++k) {
    if (std::abs(p[k]) < 1e-12) {
      if (q[k] < 0) return std::nullopt;
      continue;
    }
    const double r = q[k] / p[k];
    if (p[k] < 0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (t0 >= t1) return std::nullopt;
  const Eigen::Vector2d s0 = ua + t0 * d;
  const Eigen::Vector2d s1 = ua + t1 * d;
  if ((s1 - s0).norm() < kMinSegmentPx) return std::nullopt;
  return std::make_pair(s0, s1);
}

}  // namespace

std::vector<LineSegment2D> true_projections(const Dataset& ds, int frame_idx) {
  const auto& frame = ds.frames.at(frame_idx);
  const CameraIntrinsics intr = ds.config.intrinsics();
  std::vector<LineSegment2D> out;
  for (const auto& l : ds.scene.lines) {
    auto proj = project_segment(frame.gt_pose, l.a, l.b, intr, ds.config.image_width,
                                ds.config.image_height);
    if (!proj) continue;
    LineSegment2D seg;
    seg.start = proj->first;
    seg.end = proj->second;
    seg.id = l.id;
    seg.axis = l.axis;
    out.push_back(seg);
  }
  return out;
}

Dataset simulate_scene(const SimConfig& cfg) {
  if (cfg.n_frames < 2 || cfg.n_lines_per_axis <= 0 || cfg.n_points <= 0 || cfg.focal <= 0 ||
      cfg.pixel_sigma < 0 || cfg.odom_sigma_rot_deg < 0 || cfg.odom_sigma_trans < 0)
    throw ConfigInvalid("simulate_scene: invalid configuration");

  Dataset ds;
  ds.config = cfg;
  std::mt19937_64 scene_gen(cfg.seed);
  ds.scene = make_scene(cfg, scene_gen);
  const CameraIntrinsics intr = cfg.intrinsics();

  for (int i = 0; i < cfg.n_frames; ++i) {
    SimFrame frame;
    frame.idx = i;
    frame.timestamp = i * cfg.frame_dt;
    frame.gt_pose = trajectory_pose(cfg, i);

    std::mt19937_64 gen(cfg.seed * 6364136223846793005ULL + 1442695040888963407ULL + i);
    std::normal_distribution<double> px_noise(0.0, cfg.pixel_sigma);
    auto noisy = [&](const Eigen::Vector2d& uv) {
      if (cfg.pixel_sigma <= 0.0) return uv;
      return Eigen::Vector2d(uv.x() + px_noise(gen), uv.y() + px_noise(gen));
    };

    for (const auto& l : ds.scene.lines) {
      auto proj = project_segment(frame.gt_pose, l.a, l.b, intr, cfg.image_width,
                                  cfg.image_height);
      if (!proj) continue;
      frame.lines.push_back({l.id, l.axis, noisy(proj->first), noisy(proj->second)});
    }
    for (const auto& p : ds.scene.points) {
      const Eigen::Vector3d pc = frame.gt_pose.inverse() * p.p;
      if (pc.z() < kNearPlane) continue;
      const Eigen::Vector2d uv = intr.to_pixels({pc.x() / pc.z(), pc.y() / pc.z()});
      if (uv.x() < 1.0 || uv.y() < 1.0 || uv.x() > cfg.image_width - 2.0 ||
          uv.y() > cfg.image_height - 2.0)
        continue;
      frame.points.push_back({p.id, noisy(uv)});
    }

    if (i > 0) {
      const RigidTransform rel = ds.frames.back().gt_pose.inverse() * frame.gt_pose;
      std::normal_distribution<double> rot_noise(0.0, cfg.odom_sigma_rot_deg * M_PI / 180.0);
      std::normal_distribution<double> trans_noise(0.0, cfg.odom_sigma_trans);
      Eigen::Vector3d rv = Eigen::Vector3d::Zero(), tv = Eigen::Vector3d::Zero();
      if (cfg.odom_sigma_rot_deg > 0)
        rv = {rot_noise(gen), rot_noise(gen), rot_noise(gen)};
      if (cfg.odom_sigma_trans > 0)
        tv = {trans_noise(gen), trans_noise(gen), trans_noise(gen)};
      frame.odometry = rel * RigidTransform{Rotation::exp(rv), tv};
    }
    ds.frames.push_back(std::move(frame));
  }
  return ds;
}

GrayImage rasterize(const Dataset& ds, int frame_idx) {
  RasterParams rp;
  rp.noise_seed = unsigned(ds.config.seed * 1000003u + unsigned(frame_idx));
  return render_segments(ds.config.image_width, ds.config.image_height,
                         true_projections(ds, frame_idx), rp);
}

}  // namespace mwvio
