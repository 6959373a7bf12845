#include "mwvio/manhattan/tracking.h"

#include <cmath>

#include "mwvio/errors.h"

namespace mwvio {

namespace {

// averaged vanishing direction of one axis from the pairwise cross products
// of its tracked lines
std::optional<Eigen::Vector3d> axis_direction(const std::vector<Eigen::Vector3d>& coeffs) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  Eigen::Vector3d ref = Eigen::Vector3d::Zero();
  bool have_ref = false;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    for (size_t j = i + 1; j < coeffs.size(); ++j) {
      Eigen::Vector3d v = coeffs[i].cross(coeffs[j]);
      const double n = v.norm();
      if (n < 1e-6) continue;
      v /= n;
      if (!have_ref) {
        ref = v;
        have_ref = true;
      }
      if (v.dot(ref) < 0) v = -v;
      acc += v;
    }
  }
  if (!have_ref || acc.norm() < 1e-9) return std::nullopt;
  return acc.normalized();
}

std::optional<Rotation> refine_with_seed(const Rotation& seed,
                                         std::vector<LineSegment2D>& lines,
                                         const CameraIntrinsics& intr) {
  ClassifiedLines cls = classify_lines(seed, lines, intr);
  try {
    return refine_mf(seed, lines, cls, intr);
  } catch (const InsufficientConstraints&) {
    return std::nullopt;
  }
}

ManhattanFrame make_frame(const Rotation& r, std::vector<LineSegment2D>& lines,
                          const CameraIntrinsics& intr, int frame_idx) {
  ManhattanFrame mf;
  mf.r_cm = r;
  mf.frame_idx = frame_idx;
  mf.valid = true;
  ClassifiedLines cls = classify_lines(r, lines, intr);
  for (int a = 0; a < 3; ++a) mf.support[a] = int(cls.per_axis[a].size());
  return mf;
}

}  // namespace

MfTrackResult track_mf(MfTrackState& state, std::vector<LineSegment2D>& lines,
                       const std::optional<Rotation>& backend_r_wb, const Rotation& r_cb,
                       const CameraIntrinsics& intr, int frame_idx) {
  std::array<int, 3> n{0, 0, 0};
  std::array<std::vector<Eigen::Vector3d>, 3> coeffs;
  for (const auto& seg : lines) {
    if (seg.axis == Axis::None) continue;
    const int a = int(seg.axis);
    ++n[a];
    coeffs[a].push_back(line_sphere_coeffs(seg, intr));
  }
  const int total = n[0] + n[1] + n[2];

  MfTrackResult result;
  std::optional<Rotation> estimate;

  if (n[0] > 2 && n[1] > 2 && n[2] > 2) {
    result.used = MfCase::Case1;
    Eigen::Matrix3d vps;
    bool ok = true;
    for (int a = 0; a < 3 && ok; ++a) {
      auto v = axis_direction(coeffs[a]);
      if (!v) ok = false;
      else vps.col(a) = *v;
    }
    if (ok) {
      if (vps.determinant() < 0) vps.col(2) = -vps.col(2);
      try {
        estimate = refine_with_seed(nearest_rotation(vps), lines, intr);
      } catch (const SingularInput&) {
        estimate = std::nullopt;
      }
    }
  } else if (total > 0) {
    result.used = MfCase::Case2;
    if (auto seed = detect_mf_polar(lines, intr)) {
      estimate = refine_with_seed(seed->r_cm, lines, intr);
    }
  } else if ((state.prev && state.prev->valid) || backend_r_wb) {
    result.used = MfCase::Case3;
    if (state.prev && state.prev->valid) {
      estimate = refine_with_seed(state.prev->r_cm, lines, intr);
    } else {
      const Rotation r_mw = state.r_mw_alignment.value_or(Rotation());
      // R^c_M = R^c_b * (R^W_b)^-1 * (R^M_W)^-1
      const Rotation seed = r_cb * backend_r_wb->inverse() * r_mw.inverse();
      estimate = refine_with_seed(seed, lines, intr);
    }
  } else {
    result.used = MfCase::Detect;
  }

  if (!estimate) {
    // fresh detection, both as the Case 3 fallback and as a recovery path
    if (auto det = detect_mf_2line(lines, intr)) {
      estimate = refine_with_seed(det->r_cm, lines, intr);
      if (!estimate) estimate = det->r_cm;
    }
  }

  if (!estimate) {
    ++state.consecutive_failures;
    if (state.prev) state.prev->valid = false;
    return result;
  }

  Rotation r = *estimate;
  if (state.prev) r = canonicalize_axes(r, state.prev->r_cm);
  ManhattanFrame mf = make_frame(r, lines, intr, frame_idx);
  state.prev = mf;
  state.consecutive_failures = 0;
  result.mf = mf;
  return result;
}

VerifyResult verify_mf(const VerificationWindow& win, double d_angle_deg) {
  const int n = win.half_width;
  if (n < 1 || int(win.entries.size()) != 2 * n + 1)
    throw WindowTooSmall("verify_mf: window must hold 2n+1 entries with n >= 1");
  const int k = n;
  double sum = 0.0;
  for (int i = 0; i < int(win.entries.size()); ++i) {
    if (i == k) continue;
    const Rotation dmf = win.entries[i].r_mf * win.entries[k].r_mf.inverse();
    const Rotation dvio = win.entries[i].r_vio * win.entries[k].r_vio.inverse();
    sum += angle_of(dmf * dvio.inverse());
  }
  VerifyResult out;
  out.error_deg = sum / (2.0 * n) * 180.0 / M_PI;
  out.accept = out.error_deg < d_angle_deg;
  return out;
}

bool initial_validity(const ManhattanFrame& mf, const Eigen::Vector3d& gravity_dir_cam,
                      std::vector<LineSegment2D>& lines, const CameraIntrinsics& intr) {
  const Eigen::Vector3d g = gravity_dir_cam.normalized();
  int best_axis = 0;
  double best_dot = -1.0;
  for (int a = 0; a < 3; ++a) {
    const double v = std::abs(mf.r_cm.col(a).dot(g));
    if (v > best_dot) {
      best_dot = v;
      best_axis = a;
    }
  }
  const double angle = std::acos(std::clamp(best_dot, -1.0, 1.0));
  if (angle >= 10.0 * M_PI / 180.0) return false;
  ClassifiedLines cls = classify_lines(mf.r_cm, lines, intr);
  return int(cls.per_axis[best_axis].size()) >= 2;
}

}  // namespace mwvio
