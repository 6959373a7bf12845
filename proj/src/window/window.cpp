#include "mwvio/window/window.h"

#include <cmath>

#include "mwvio/errors.h"

namespace mwvio {

int PriorBlock::total_dim() const {
  int d = 0;
  for (const auto& e : entries) d += e.dim;
  return d;
}

int PriorBlock::offset_of(const BlockId& id) const {
  int off = 0;
  for (const auto& e : entries) {
    if (e.id == id) return off;
    off += e.dim;
  }
  return -1;
}

void PriorBlock::drop_block(const BlockId& id) {
  const int off = offset_of(id);
  if (off < 0) return;
  int dim = 0;
  size_t entry_idx = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) {
      dim = entries[i].dim;
      entry_idx = i;
      break;
    }
  }
  const int total = total_dim();
  const int rest = total - dim;

  Eigen::MatrixXd h = sqrt_h.transpose() * sqrt_h;
  Eigen::VectorXd b = sqrt_h.transpose() * r0;

  // reorder: retained first, dropped block last
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(total, total);
  int col = 0;
  for (int i = 0; i < total; ++i) {
    if (i < off || i >= off + dim) perm(i, col++) = 1.0;
  }
  for (int i = off; i < off + dim; ++i) perm(i, col++) = 1.0;
  h = perm.transpose() * h * perm;
  b = perm.transpose() * b;

  const Eigen::MatrixXd h_rr = h.topLeftCorner(rest, rest);
  const Eigen::MatrixXd h_rm = h.topRightCorner(rest, dim);
  const Eigen::MatrixXd h_mm = h.bottomRightCorner(dim, dim);
  const Eigen::VectorXd b_r = b.head(rest);
  const Eigen::VectorXd b_m = b.tail(dim);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(h_mm);
  Eigen::VectorXd inv = es_m.eigenvalues();
  const double thresh = 1e-10 * std::max(1.0, inv.cwiseAbs().maxCoeff());
  for (int i = 0; i < inv.size(); ++i) inv[i] = inv[i] > thresh ? 1.0 / inv[i] : 0.0;
  const Eigen::MatrixXd h_mm_inv =
      es_m.eigenvectors() * inv.asDiagonal() * es_m.eigenvectors().transpose();

  const Eigen::MatrixXd h_new = h_rr - h_rm * h_mm_inv * h_rm.transpose();
  const Eigen::VectorXd b_new = b_r - h_rm * h_mm_inv * b_m;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_new);
  Eigen::VectorXd ev = es.eigenvalues();
  const double keep = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<int> kept;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > keep) kept.push_back(i);

  Eigen::MatrixXd vt(kept.size(), rest);
  Eigen::VectorXd s_sqrt(kept.size()), s_inv_sqrt(kept.size());
  for (size_t i = 0; i < kept.size(); ++i) {
    vt.row(i) = es.eigenvectors().col(kept[i]).transpose();
    s_sqrt[i] = std::sqrt(ev[kept[i]]);
    s_inv_sqrt[i] = 1.0 / s_sqrt[i];
  }
  sqrt_h = s_sqrt.asDiagonal() * vt;
  r0 = s_inv_sqrt.asDiagonal() * (vt * b_new);
  entries.erase(entries.begin() + entry_idx);
}

const FrameState* WindowState::frame(int idx) const {
  for (const auto& f : frames)
    if (f.frame_idx == idx) return &f;
  return nullptr;
}

FrameState* WindowState::frame(int idx) {
  for (auto& f : frames)
    if (f.frame_idx == idx) return &f;
  return nullptr;
}

namespace {

void check_baseline(const RigidTransform& t_wc_i, const RigidTransform& t_wc_j,
                    double min_baseline_m, double min_baseline_deg) {
  const double trans = (t_wc_i.t - t_wc_j.t).norm();
  const double rot = rotation_angle(t_wc_i.r.inverse() * t_wc_j.r) * 180.0 / M_PI;
  if (trans <= min_baseline_m && rot <= min_baseline_deg)
    throw InsufficientBaseline("triangulation: baseline too small");
}

}  // namespace

PluckerLine triangulate_line(const Eigen::Vector2d& s_i, const Eigen::Vector2d& e_i,
                             const Eigen::Vector2d& s_j, const Eigen::Vector2d& e_j,
                             const RigidTransform& t_wc_i, const RigidTransform& t_wc_j,
                             double min_baseline_m, double min_baseline_deg) {
  check_baseline(t_wc_i, t_wc_j, min_baseline_m, min_baseline_deg);

  auto interpretation_plane = [](const Eigen::Vector2d& s, const Eigen::Vector2d& e,
                                 const RigidTransform& t_wc) {
    const Eigen::Vector3d ps(s.x(), s.y(), 1.0);
    const Eigen::Vector3d pe(e.x(), e.y(), 1.0);
    const Eigen::Vector3d n_cam = ps.cross(pe);
    if (n_cam.norm() < 1e-12) throw DegenerateSegment("triangulate_line: endpoints coincide");
    return Plane::from_point_normal(t_wc.t, t_wc.r * n_cam);
  };

  const Plane pi = interpretation_plane(s_i, e_i, t_wc_i);
  const Plane pj = interpretation_plane(s_j, e_j, t_wc_j);
  return plucker_from_planes(pi, pj);
}

double triangulate_point(const Eigen::Vector2d& obs_i, const Eigen::Vector2d& obs_j,
                         const RigidTransform& t_wc_i, const RigidTransform& t_wc_j,
                         double min_baseline_m, double min_baseline_deg) {
  check_baseline(t_wc_i, t_wc_j, min_baseline_m, min_baseline_deg);

  const Eigen::Vector3d o1 = t_wc_i.t;
  const Eigen::Vector3d o2 = t_wc_j.t;
  const Eigen::Vector3d d1 = (t_wc_i.r * Eigen::Vector3d(obs_i.x(), obs_i.y(), 1.0)).normalized();
  const Eigen::Vector3d d2 = (t_wc_j.r * Eigen::Vector3d(obs_j.x(), obs_j.y(), 1.0)).normalized();

  // closest points of the two rays
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2);
  const Eigen::Vector3d w0 = o1 - o2;
  const double d = d1.dot(w0), e = d2.dot(w0);
  const double denom = a * c - b * b;
  if (denom < 1e-12) throw InsufficientBaseline("triangulate_point: rays are parallel");
  const double t1 = (b * e - c * d) / denom;
  const double t2 = (a * e - b * d) / denom;
  const Eigen::Vector3d p = 0.5 * ((o1 + t1 * d1) + (o2 + t2 * d2));

  const Eigen::Vector3d p_cam = t_wc_i.inverse() * p;
  if (p_cam.z() <= 1e-6) throw BehindCamera("triangulate_point: point behind camera");
  return 1.0 / p_cam.z();
}

}  // namespace mwvio
