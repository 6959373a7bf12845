#include "mwvio/pipeline/vio.h"

#include <cmath>

#include "mwvio/errors.h"
#include "mwvio/lineflow/tracker.h"
#include "mwvio/pipeline/io.h"

namespace mwvio {

VioConfig default_vio_config(const Dataset& ds) {
  VioConfig cfg;
  const double f = ds.config.focal;
  cfg.backend.sigma_point = std::max(ds.config.pixel_sigma, 1.5) / f;
  cfg.backend.sigma_line = std::max(ds.config.pixel_sigma, 1.5) / f;
  cfg.backend.sigma_struct = 1.0 / f;
  return cfg;
}

namespace {

OdometryMeasurement odometry_from(const Dataset& ds, const SimFrame& frame) {
  OdometryMeasurement odo;
  odo.rel = *frame.odometry;
  odo.sigma_rot = std::max(ds.config.odom_sigma_rot_deg * M_PI / 180.0, 1e-4);
  odo.sigma_trans = std::max(ds.config.odom_sigma_trans, 1e-4);
  return odo;
}

struct VerEntry {
  bool has_mf = false;
  Rotation r_cm;   // R^c_M measurement
  Rotation r_cw;   // camera-from-world, front-end estimate
  ManhattanFrame mf;
};

void rotate_world(WindowState& w, Trajectory& traj, const Rotation& r_mw) {
  for (auto& f : w.frames) {
    f.pose.r = r_mw * f.pose.r;
    f.pose.t = r_mw * f.pose.t;
  }
  const RigidTransform rot{r_mw, Eigen::Vector3d::Zero()};
  for (auto& [id, lm] : w.lines) {
    if (!lm.active) continue;
    lm.line = plucker_to_orthonormal(plucker_transform(rot, orthonormal_to_plucker(lm.line)));
  }
  for (auto& e : traj.entries) {
    e.p = r_mw * e.p;
    e.q = (r_mw * Rotation::from_quaternion(e.q)).quaternion();
  }
}

}  // namespace

VioResult run_vio(const Dataset& ds, const VioConfig& cfg) {
  const CameraIntrinsics intr = ds.config.intrinsics();
  const Rotation r_cb = cfg.backend.t_bc.r.inverse();  // camera-from-body
  const int n = cfg.verify_half_width;

  VioResult out;
  WindowState window;
  MfTrackState mf_state;
  std::map<long, Axis> label_map;
  std::vector<VerEntry> ver;  // indexed by frame
  bool first_mf_validated = false;

  // pixel-mode tracking state
  ImagePyramid prev_pyr;
  std::vector<LineSegment2D> prev_segs;

  for (size_t i = 0; i < ds.frames.size(); ++i) {
    const SimFrame& frame = ds.frames[i];
    FrameDiag diag;
    diag.frame_idx = frame.idx;

    // front-end pose prediction (last back-end state propagated by odometry)
    RigidTransform pose_pred;
    if (window.frames.empty()) {
      pose_pred = frame.gt_pose;  // simulator-provided initial pose
    } else {
      pose_pred = window.frames.back().pose * (frame.odometry ? *frame.odometry
                                                              : RigidTransform{});
    }

    // line observations: simulator packets or tracked pixels
    std::vector<LineSegment2D> segs;
    if (!cfg.pixels_mode) {
      segs.reserve(frame.lines.size());
      for (const auto& lo : frame.lines) {
        LineSegment2D s;
        s.start = lo.s;
        s.end = lo.e;
        s.id = lo.id;
        auto it = label_map.find(lo.id);
        s.axis = it != label_map.end() ? it->second : Axis::None;
        segs.push_back(s);
      }
    } else {
      GrayImage img = frame.image_path.empty() ? rasterize(ds, int(i))
                                               : read_pgm(frame.image_path);
      ImagePyramid pyr = build_pyramid(img, cfg.pyramid_levels);
      if (i == 0 || prev_segs.empty()) {
        segs = detect_lines(img, cfg.detector);
      } else {
        for (const auto& ps : prev_segs) {
          TrackResult tr = track_line(prev_pyr, pyr, ps, cfg.track_iters);
          if (tr.status != TrackStatus::Tracked) continue;
          LineSegment2D s = tr.line;
          s.id = ps.id;
          auto it = label_map.find(ps.id);
          s.axis = it != label_map.end() ? it->second : Axis::None;
          segs.push_back(s);
        }
        segs = merge_collinear(std::move(segs));
        for (auto& s : segs) s = extend_endpoints(s, img);
        segs = replenish(segs, img, cfg.detector);
      }
      prev_pyr = std::move(pyr);
    }
    diag.n_line_obs = int(segs.size());
    diag.n_point_obs = int(frame.points.size());

    // Manhattan tracking-by-detection
    std::optional<Rotation> backend_rot;
    if (!window.frames.empty()) backend_rot = pose_pred.r;
    MfTrackResult mf_res = track_mf(mf_state, segs, backend_rot, r_cb, intr, frame.idx);
    diag.mf_case = mf_res.used;

    if (mf_res.mf && !first_mf_validated) {
      const Rotation r_wc = pose_pred.r * cfg.backend.t_bc.r;
      const Eigen::Vector3d g_cam = r_wc.inverse() * ds.config.gravity_world;
      if (initial_validity(*mf_res.mf, g_cam, segs, intr)) {
        first_mf_validated = true;
      } else {
        mf_res.mf.reset();
        if (mf_state.prev) mf_state.prev->valid = false;
      }
    }
    diag.mf_found = mf_res.mf.has_value();

    label_map.clear();
    for (const auto& s : segs)
      if (s.id >= 0) label_map[s.id] = s.axis;

    // verification ring
    VerEntry ve;
    ve.r_cw = (pose_pred.r * cfg.backend.t_bc.r).inverse();
    if (mf_res.mf) {
      ve.has_mf = true;
      ve.r_cm = mf_res.mf->r_cm;
      ve.mf = *mf_res.mf;
    }
    ver.push_back(ve);

    if (int(i) >= 2 * n) {
      const int k = int(i) - n;
      bool all = true;
      for (int j = k - n; j <= k + n; ++j)
        if (j < 0 || !ver[j].has_mf) all = false;
      if (all) {
        VerificationWindow win;
        win.half_width = n;
        for (int j = k - n; j <= k + n; ++j) win.entries.push_back({ver[j].r_cm, ver[j].r_cw});
        const VerifyResult vres = verify_mf(win, cfg.d_angle_deg);
        diag.verified_frame = k;
        diag.verify_error_deg = vres.error_deg;
        diag.verify_accept = vres.accept;
        if (vres.accept && out.aligned && window.frame(k)) {
          window.mfs[k] = ver[k].mf;
        }
      }
    }

    // back-end packet
    FramePacket packet;
    packet.frame_idx = frame.idx;
    packet.timestamp = frame.timestamp;
    if (window.frames.empty()) {
      packet.initial_pose = frame.gt_pose;
    } else {
      packet.odometry = odometry_from(ds, frame);
    }
    for (const auto& p : frame.points)
      packet.points.emplace_back(p.id, intr.normalize(p.uv));
    for (const auto& s : segs) {
      if (s.id < 0) continue;
      packet.lines.push_back(
          {s.id, intr.normalize(s.start), intr.normalize(s.end), s.axis});
    }

    BackendConfig bc = cfg.backend;
    bc.use_manhattan = cfg.backend.use_manhattan && out.aligned;
    bc.use_struct_lines = cfg.backend.use_struct_lines && out.aligned;
    diag.solve = manage_window(window, packet, bc);

    // world alignment, once
    if (!out.aligned && int(i) == cfg.align_frame && mf_res.mf) {
      const Rotation r_wb = window.frames.back().pose.r;
      out.r_mw = align_world(mf_res.mf->r_cm.inverse(), r_cb, r_wb);
      rotate_world(window, out.trajectory, out.r_mw);
      mf_state.r_mw_alignment = out.r_mw;
      out.aligned = true;
    }

    if (cfg.pixels_mode) prev_segs = segs;

    const FrameState& latest = window.frames.back();
    Trajectory::Entry te;
    te.t = latest.timestamp;
    te.p = latest.pose.t;
    te.q = latest.pose.r.quaternion();
    out.trajectory.entries.push_back(te);
    out.diagnostics.push_back(diag);
  }
  return out;
}

}  // namespace mwvio
