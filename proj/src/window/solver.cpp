#include "mwvio/window/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mwvio/errors.h"

namespace mwvio {

namespace {

struct StateVector {
  std::map<int, RigidTransform> poses;
  std::map<long, OrthonormalLine> lines;
  std::map<long, double> depths;
};

StateVector extract_state(const WindowState& w) {
  StateVector x;
  for (const auto& f : w.frames) x.poses[f.frame_idx] = f.pose;
  for (const auto& [id, lm] : w.lines)
    if (lm.active) x.lines[id] = lm.line;
  for (const auto& [id, lm] : w.points)
    if (lm.active) x.depths[id] = lm.inv_depth;
  return x;
}

void write_back(WindowState& w, const StateVector& x) {
  for (auto& f : w.frames) f.pose = x.poses.at(f.frame_idx);
  for (auto& [id, lm] : w.lines)
    if (lm.active) lm.line = x.lines.at(id);
  for (auto& [id, lm] : w.points)
    if (lm.active) lm.inv_depth = x.depths.at(id);
}

struct FactorSpec {
  enum Type { Odometry, Point, Line, MfRot, StructLine, AxisPrior } type;
  int frame_a = -1, frame_b = -1;
  long landmark = -1;
  Eigen::Vector2d host_uv{0, 0}, target_uv{0, 0};
  Eigen::Vector2d line_s{0, 0}, line_e{0, 0};
  OdometryMeasurement odo;
  Rotation mf_meas;  // MfRot: measured R^M_b; StructLine: measured R^c_M
  Axis axis = Axis::None;
  bool robust = false;
};

FactorEval eval_factor(const FactorSpec& s, const StateVector& x, const BackendConfig& cfg) {
  switch (s.type) {
    case FactorSpec::Odometry:
      return relpose_odometry_residual(x.poses.at(s.frame_a), s.frame_a, x.poses.at(s.frame_b),
                                       s.frame_b, s.odo.rel, s.odo.sigma_rot, s.odo.sigma_trans);
    case FactorSpec::Point:
      return point_reproj_residual(x.poses.at(s.frame_a), s.frame_a, x.poses.at(s.frame_b),
                                   s.frame_b, x.depths.at(s.landmark), int(s.landmark), s.host_uv,
                                   s.target_uv, cfg.t_bc, cfg.sigma_point);
    case FactorSpec::Line:
      return line_reproj_residual(x.poses.at(s.frame_a), s.frame_a, x.lines.at(s.landmark),
                                  int(s.landmark), s.line_s, s.line_e, cfg.t_bc, cfg.sigma_line);
    case FactorSpec::MfRot:
      return mf_rotation_residual(s.mf_meas, x.poses.at(s.frame_a), s.frame_a, cfg.sigma_mf_rot);
    case FactorSpec::StructLine:
      return struct_line_residual(x.poses.at(s.frame_a), s.frame_a, x.lines.at(s.landmark),
                                  int(s.landmark), s.axis, s.mf_meas, cfg.t_bc, cfg.sigma_struct);
    case FactorSpec::AxisPrior:
      return line_axis_prior_residual(x.lines.at(s.landmark), int(s.landmark), s.axis,
                                      cfg.sigma_axis_prior);
  }
  throw Error("eval_factor: unknown factor type");
}

std::vector<BlockId> factor_blocks(const FactorSpec& s) {
  switch (s.type) {
    case FactorSpec::Odometry:
      return {{BlockKind::Pose, s.frame_a}, {BlockKind::Pose, s.frame_b}};
    case FactorSpec::Point:
      return {{BlockKind::Pose, s.frame_a},
              {BlockKind::Pose, s.frame_b},
              {BlockKind::Point, int(s.landmark)}};
    case FactorSpec::Line:
      return {{BlockKind::Pose, s.frame_a}, {BlockKind::Line, int(s.landmark)}};
    case FactorSpec::MfRot:
      return {{BlockKind::Pose, s.frame_a}};
    case FactorSpec::StructLine:
      return {{BlockKind::Pose, s.frame_a}, {BlockKind::Line, int(s.landmark)}};
    case FactorSpec::AxisPrior:
      return {{BlockKind::Line, int(s.landmark)}};
  }
  return {};
}

std::vector<FactorSpec> assemble_factors(const WindowState& w, const BackendConfig& cfg,
                                         SolveReport* report) {
  std::vector<FactorSpec> specs;

  for (size_t i = 1; i < w.frames.size(); ++i) {
    auto it = w.odometry.find(w.frames[i].frame_idx);
    if (it == w.odometry.end()) continue;
    FactorSpec s;
    s.type = FactorSpec::Odometry;
    s.frame_a = w.frames[i - 1].frame_idx;
    s.frame_b = w.frames[i].frame_idx;
    s.odo = it->second;
    specs.push_back(s);
    if (report) ++report->n_odometry;
  }

  for (const auto& [id, lm] : w.points) {
    if (!lm.active) continue;
    const PointObs* host = nullptr;
    for (const auto& o : lm.obs)
      if (o.frame_idx == lm.host_frame) host = &o;
    if (!host || !w.frame(lm.host_frame)) continue;
    for (const auto& o : lm.obs) {
      if (o.frame_idx == lm.host_frame || !w.frame(o.frame_idx)) continue;
      FactorSpec s;
      s.type = FactorSpec::Point;
      s.frame_a = lm.host_frame;
      s.frame_b = o.frame_idx;
      s.landmark = id;
      s.host_uv = host->uv;
      s.target_uv = o.uv;
      s.robust = true;
      specs.push_back(s);
      if (report) ++report->n_point;
    }
  }

  for (const auto& [id, lm] : w.lines) {
    if (!lm.active) continue;
    for (const auto& o : lm.obs) {
      if (!w.frame(o.frame_idx)) continue;
      FactorSpec s;
      s.type = FactorSpec::Line;
      s.frame_a = o.frame_idx;
      s.landmark = id;
      s.line_s = o.s;
      s.line_e = o.e;
      s.robust = true;
      specs.push_back(s);
      if (report) ++report->n_line;
    }
  }

  if (cfg.use_manhattan) {
    for (const auto& [fidx, mf] : w.mfs) {
      if (!w.frame(fidx) || !mf.valid) continue;
      FactorSpec s;
      s.type = FactorSpec::MfRot;
      s.frame_a = fidx;
      // measured body rotation in MW: R^M_b = (R^c_M)^-1 * (R^b_c)^-1
      s.mf_meas = mf.r_cm.inverse() * cfg.t_bc.r.inverse();
      specs.push_back(s);
      if (report) ++report->n_mf;
    }
  }

  if (cfg.use_struct_lines) {
    for (const auto& [id, lm] : w.lines) {
      if (!lm.active || lm.axis == Axis::None) continue;
      for (const auto& o : lm.obs) {
        if (!w.frame(o.frame_idx)) continue;
        auto it = w.mfs.find(o.frame_idx);
        if (it == w.mfs.end() || !it->second.valid) continue;
        FactorSpec s;
        s.type = FactorSpec::StructLine;
        s.frame_a = o.frame_idx;
        s.landmark = id;
        s.axis = lm.axis;
        s.mf_meas = it->second.r_cm;
        specs.push_back(s);
        if (report) ++report->n_struct;
      }
      FactorSpec s;
      s.type = FactorSpec::AxisPrior;
      s.landmark = id;
      s.axis = lm.axis;
      specs.push_back(s);
      if (report) ++report->n_axis_prior;
    }
  }

  return specs;
}

// prior residual and block-column jacobians at the current state
struct PriorEval {
  Eigen::VectorXd residual;
  const PriorBlock* prior = nullptr;
};

Eigen::VectorXd prior_delta(const PriorBlock& p, const StateVector& x) {
  Eigen::VectorXd d(p.total_dim());
  int off = 0;
  for (const auto& e : p.entries) {
    switch (e.id.kind) {
      case BlockKind::Pose:
        d.segment<6>(off) = pose_boxminus(x.poses.at(e.id.id), e.pose_lin);
        break;
      case BlockKind::Line:
        d.segment<4>(off) = orthonormal_boxminus(x.lines.at(e.id.id), e.line_lin);
        break;
      case BlockKind::Point:
        d[off] = x.depths.at(e.id.id) - e.depth_lin;
        break;
    }
    off += e.dim;
  }
  return d;
}

struct BlockIndex {
  std::map<BlockId, int> offset;
  std::vector<BlockId> order;
  int total = 0;

  void add(const BlockId& id) {
    if (offset.count(id)) return;
    offset[id] = total;
    total += block_dim(id.kind);
    order.push_back(id);
  }
  bool has(const BlockId& id) const { return offset.count(id) > 0; }
};

StateVector retract_state(const StateVector& x, const BlockIndex& idx,
                          const Eigen::VectorXd& delta) {
  StateVector out = x;
  for (const auto& id : idx.order) {
    const int off = idx.offset.at(id);
    switch (id.kind) {
      case BlockKind::Pose:
        out.poses[id.id] = pose_retract(x.poses.at(id.id), delta.segment<6>(off));
        break;
      case BlockKind::Line:
        out.lines[id.id] = orthonormal_retract(x.lines.at(id.id), delta.segment<4>(off));
        break;
      case BlockKind::Point:
        out.depths[id.id] = x.depths.at(id.id) + delta[off];
        break;
    }
  }
  return out;
}

double total_cost(const std::vector<FactorSpec>& specs, const WindowState& w,
                  const StateVector& x, const BackendConfig& cfg) {
  double cost = 0.0;
  for (const auto& s : specs) {
    FactorEval fe;
    try {
      fe = eval_factor(s, x, cfg);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    const double sq = (fe.sqrt_info * fe.residual).squaredNorm();
    cost += s.robust ? huber(sq) : sq;
  }
  if (w.prior) {
    const Eigen::VectorXd r = w.prior->r0 + w.prior->sqrt_h * prior_delta(*w.prior, x);
    cost += r.squaredNorm();
  }
  return cost;
}

// Accumulate the Gauss-Newton system over the free blocks.
void build_normal_equations(const std::vector<FactorSpec>& specs, const WindowState& w,
                            const StateVector& x, const BackendConfig& cfg,
                            const BlockIndex& idx, Eigen::MatrixXd& h, Eigen::VectorXd& g) {
  h.setZero(idx.total, idx.total);
  g.setZero(idx.total);

  for (const auto& s : specs) {
    FactorEval fe;
    try {
      fe = eval_factor(s, x, cfg);
    } catch (const Error&) {
      continue;  // cheirality/degeneracy at the linearization point: skip
    }
    Eigen::VectorXd wr = fe.sqrt_info * fe.residual;
    double scale = 1.0;
    if (s.robust) scale = std::sqrt(huber_derivative(wr.squaredNorm()));
    wr *= scale;

    std::vector<std::pair<int, Eigen::MatrixXd>> jw;
    for (const auto& [bid, jac] : fe.jacobians) {
      if (!idx.has(bid)) continue;
      jw.emplace_back(idx.offset.at(bid), scale * (fe.sqrt_info * jac));
    }
    for (const auto& [oi, ji] : jw) {
      g.segment(oi, ji.cols()) += ji.transpose() * wr;
      for (const auto& [oj, jj] : jw) {
        h.block(oi, oj, ji.cols(), jj.cols()) += ji.transpose() * jj;
      }
    }
  }

  if (w.prior) {
    const PriorBlock& p = *w.prior;
    const Eigen::VectorXd r = p.r0 + p.sqrt_h * prior_delta(p, x);
    int off_p = 0;
    std::vector<std::tuple<int, int, int>> cols;  // (prior col, solver col, dim)
    for (const auto& e : p.entries) {
      if (idx.has(e.id)) cols.emplace_back(off_p, idx.offset.at(e.id), e.dim);
      off_p += e.dim;
    }
    for (const auto& [pc_i, sc_i, d_i] : cols) {
      const Eigen::MatrixXd ji = p.sqrt_h.middleCols(pc_i, d_i);
      g.segment(sc_i, d_i) += ji.transpose() * r;
      for (const auto& [pc_j, sc_j, d_j] : cols) {
        h.block(sc_i, sc_j, d_i, d_j) +=
            ji.transpose() * p.sqrt_h.middleCols(pc_j, d_j);
      }
    }
  }
}

}  // namespace

SolveReport optimize(WindowState& w, const BackendConfig& cfg) {
  SolveReport report;
  if (w.frames.size() < 2) return report;

  std::vector<FactorSpec> specs = assemble_factors(w, cfg, &report);
  report.prior_used = w.prior.has_value();

  StateVector x = extract_state(w);

  // drop factors that are degenerate at the linearization point (cheirality,
  // vanishing projections); the set stays fixed for the whole solve
  std::erase_if(specs, [&](const FactorSpec& s) {
    try {
      eval_factor(s, x, cfg);
      return false;
    } catch (const Error&) {
      return true;
    }
  });

  std::set<BlockId> referenced;
  for (const auto& s : specs)
    for (const auto& b : factor_blocks(s)) referenced.insert(b);
  if (w.prior)
    for (const auto& e : w.prior->entries) referenced.insert(e.id);

  // gauge: hold the first pose unless the prior constrains it
  BlockIndex idx;
  const BlockId first_pose{BlockKind::Pose, w.frames.front().frame_idx};
  const bool fix_first = !(w.prior && w.prior->covers(first_pose));
  for (const auto& f : w.frames) {
    const BlockId id{BlockKind::Pose, f.frame_idx};
    if (fix_first && id == first_pose) continue;
    if (referenced.count(id)) idx.add(id);
  }
  for (const auto& [id, lm] : w.lines)
    if (lm.active && referenced.count({BlockKind::Line, int(id)}))
      idx.add({BlockKind::Line, int(id)});
  for (const auto& [id, lm] : w.points)
    if (lm.active && referenced.count({BlockKind::Point, int(id)}))
      idx.add({BlockKind::Point, int(id)});
  if (idx.total == 0) return report;

  double cost = total_cost(specs, w, x, cfg);
  report.initial_cost = cost;
  report.final_cost = cost;

  double mu = 1e-4;
  int rejects_at_cap = 0;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Eigen::MatrixXd h;
    Eigen::VectorXd g;
    build_normal_equations(specs, w, x, cfg, idx, h, g);
    ++report.iterations;

    Eigen::VectorXd diag = h.diagonal().cwiseMax(1e-12);
    Eigen::MatrixXd damped = h;
    damped.diagonal() += mu * diag;

    const Eigen::VectorXd delta = damped.ldlt().solve(-g);
    bool ok = delta.allFinite();

    double new_cost = std::numeric_limits<double>::infinity();
    StateVector x_new;
    if (ok) {
      x_new = retract_state(x, idx, delta);
      new_cost = total_cost(specs, w, x_new, cfg);
      ok = std::isfinite(new_cost) && new_cost <= cost;
    }

    if (ok) {
      ++report.accepted;
      rejects_at_cap = 0;
      const double rel = (cost - new_cost) / std::max(cost, 1e-300);
      x = std::move(x_new);
      cost = new_cost;
      mu = std::max(mu / 10.0, 1e-12);
      if (rel < 1e-6) break;
    } else {
      ++report.rejected;
      if (mu >= 1e8) {
        if (++rejects_at_cap >= 5)
          throw SolverDiverged("optimize: 5 consecutive rejections at maximum damping");
        mu = 1e8;
      } else {
        mu = std::min(mu * 10.0, 1e8);
      }
    }
  }

  report.final_cost = cost;
  write_back(w, x);
  return report;
}

void marginalize_oldest(WindowState& w, const BackendConfig& cfg) {
  if (w.frames.empty()) return;
  const int old_idx = w.frames.front().frame_idx;
  const BlockId old_pose{BlockKind::Pose, old_idx};

  std::vector<FactorSpec> all = assemble_factors(w, cfg, nullptr);
  std::vector<FactorSpec> touching;
  for (const auto& s : all) {
    for (const auto& b : factor_blocks(s)) {
      if (b == old_pose ||
          (b.kind == BlockKind::Point && w.points.count(b.id) &&
           w.points.at(b.id).host_frame == old_idx)) {
        touching.push_back(s);
        break;
      }
    }
  }

  const bool prior_touches = w.prior && w.prior->covers(old_pose);
  const bool gauge_fixed = !prior_touches;  // mirror the solver's gauge rule

  auto drop_frame_bookkeeping = [&]() {
    StateVector x = extract_state(w);
    // re-host points whose host frame departs
    for (auto& [id, lm] : w.points) {
      if (lm.host_frame != old_idx) continue;
      const PointObs* host_obs = nullptr;
      for (const auto& o : lm.obs)
        if (o.frame_idx == old_idx) host_obs = &o;
      std::erase_if(lm.obs, [&](const PointObs& o) { return o.frame_idx == old_idx; });
      if (lm.obs.empty()) continue;
      if (!lm.active || !host_obs) {
        lm.host_frame = lm.obs.front().frame_idx;
        lm.active = false;
        continue;
      }
      // transfer the depth through the current estimate
      const RigidTransform old_cam = x.poses.at(old_idx) * cfg.t_bc;
      const Eigen::Vector3d p_w =
          old_cam * (Eigen::Vector3d(host_obs->uv.x(), host_obs->uv.y(), 1.0) / lm.inv_depth);
      lm.host_frame = lm.obs.front().frame_idx;
      const RigidTransform new_cam = x.poses.at(lm.host_frame) * cfg.t_bc;
      const Eigen::Vector3d p_c = new_cam.inverse() * p_w;
      if (p_c.z() > 1e-3) {
        lm.inv_depth = 1.0 / p_c.z();
      } else {
        lm.active = false;
      }
    }
    for (auto& [id, lm] : w.lines) {
      std::erase_if(lm.obs, [&](const LineObs& o) { return o.frame_idx == old_idx; });
    }
    w.odometry.erase(old_idx);
    w.mfs.erase(old_idx);
    w.frames.erase(w.frames.begin());

    // prune landmarks below 2 observations, except tracks that are still
    // alive at the newest frame and may yet grow
    const int newest = w.frames.empty() ? -1 : w.frames.back().frame_idx;
    std::vector<long> dead_points, dead_lines;
    for (const auto& [id, lm] : w.points)
      if (lm.obs.size() < 2 && (lm.obs.empty() || lm.obs.back().frame_idx != newest))
        dead_points.push_back(id);
    for (const auto& [id, lm] : w.lines)
      if (lm.obs.size() < 2 && (lm.obs.empty() || lm.obs.back().frame_idx != newest))
        dead_lines.push_back(id);
    for (long id : dead_points) {
      if (w.prior) w.prior->drop_block({BlockKind::Point, int(id)});
      w.points.erase(id);
    }
    for (long id : dead_lines) {
      if (w.prior) w.prior->drop_block({BlockKind::Line, int(id)});
      w.lines.erase(id);
    }
  };

  if (touching.empty() && !prior_touches) {
    drop_frame_bookkeeping();
    return;
  }

  // involved blocks: everything the touching factors and the prior act on
  BlockIndex idx;
  auto add_unless_fixed = [&](const BlockId& b) {
    if (gauge_fixed && b == old_pose) return;
    idx.add(b);
  };
  for (const auto& s : touching)
    for (const auto& b : factor_blocks(s)) add_unless_fixed(b);
  if (w.prior)
    for (const auto& e : w.prior->entries) add_unless_fixed(e.id);

  StateVector x = extract_state(w);
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  // reuse the solver's accumulation; the prior is folded in through w.prior
  build_normal_equations(touching, w, x, cfg, idx, h, g);
  // b for the quadratic model |r + J d|^2 is J^T r = g
  const Eigen::VectorXd b = g;

  // marginalized set
  std::vector<BlockId> marg;
  if (!gauge_fixed && idx.has(old_pose)) marg.push_back(old_pose);
  for (const auto& [id, lm] : w.points) {
    const BlockId bid{BlockKind::Point, int(id)};
    if (lm.host_frame == old_idx && idx.has(bid)) marg.push_back(bid);
  }
  for (const auto& [id, lm] : w.lines) {
    const BlockId bid{BlockKind::Line, int(id)};
    if (!idx.has(bid)) continue;
    bool only_old = true;
    for (const auto& o : lm.obs)
      if (o.frame_idx != old_idx) only_old = false;
    if (only_old) marg.push_back(bid);
  }

  std::vector<BlockId> retained;
  for (const auto& bid : idx.order)
    if (std::find(marg.begin(), marg.end(), bid) == marg.end()) retained.push_back(bid);

  // permute to [retained; marg]
  int n_r = 0, n_m = 0;
  for (const auto& bid : retained) n_r += block_dim(bid.kind);
  for (const auto& bid : marg) n_m += block_dim(bid.kind);
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(idx.total, n_r + n_m);
  int col = 0;
  for (const auto& bid : retained) {
    const int d = block_dim(bid.kind), off = idx.offset.at(bid);
    for (int k = 0; k < d; ++k) perm(off + k, col + k) = 1.0;
    col += d;
  }
  for (const auto& bid : marg) {
    const int d = block_dim(bid.kind), off = idx.offset.at(bid);
    for (int k = 0; k < d; ++k) perm(off + k, col + k) = 1.0;
    col += d;
  }
  Eigen::MatrixXd hp = perm.transpose() * h * perm;
  Eigen::VectorXd bp = perm.transpose() * b;

  Eigen::MatrixXd h_new = hp.topLeftCorner(n_r, n_r);
  Eigen::VectorXd b_new = bp.head(n_r);
  if (n_m > 0) {
    const Eigen::MatrixXd h_rm = hp.topRightCorner(n_r, n_m);
    const Eigen::MatrixXd h_mm = hp.bottomRightCorner(n_m, n_m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(h_mm);
    Eigen::VectorXd inv = es_m.eigenvalues();
    const double thresh = 1e-10 * std::max(1.0, inv.cwiseAbs().maxCoeff());
    for (int i = 0; i < inv.size(); ++i) inv[i] = inv[i] > thresh ? 1.0 / inv[i] : 0.0;
    const Eigen::MatrixXd h_mm_inv =
        es_m.eigenvectors() * inv.asDiagonal() * es_m.eigenvectors().transpose();
    h_new -= h_rm * h_mm_inv * h_rm.transpose();
    b_new -= h_rm * h_mm_inv * bp.tail(n_m);
  }

  // square-root form of the reduced system
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_new);
  Eigen::VectorXd ev = es.eigenvalues();
  const double keep = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<int> kept;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > keep) kept.push_back(i);

  PriorBlock prior;
  prior.sqrt_h.resize(kept.size(), n_r);
  prior.r0.resize(kept.size());
  {
    Eigen::MatrixXd vt(kept.size(), n_r);
    for (size_t i = 0; i < kept.size(); ++i) vt.row(i) = es.eigenvectors().col(kept[i]).transpose();
    Eigen::VectorXd s_sqrt(kept.size());
    for (size_t i = 0; i < kept.size(); ++i) s_sqrt[i] = std::sqrt(ev[kept[i]]);
    prior.sqrt_h = s_sqrt.asDiagonal() * vt;
    Eigen::VectorXd tmp = vt * b_new;
    for (size_t i = 0; i < kept.size(); ++i) tmp[i] /= s_sqrt[i];
    prior.r0 = tmp;
  }
  for (const auto& bid : retained) {
    PriorBlock::Entry e;
    e.id = bid;
    e.dim = block_dim(bid.kind);
    switch (bid.kind) {
      case BlockKind::Pose: e.pose_lin = x.poses.at(bid.id); break;
      case BlockKind::Line: e.line_lin = x.lines.at(bid.id); break;
      case BlockKind::Point: e.depth_lin = x.depths.at(bid.id); break;
    }
    prior.entries.push_back(e);
  }

  w.prior = std::move(prior);
  drop_frame_bookkeeping();
}

SolveReport manage_window(WindowState& w, const FramePacket& packet, const BackendConfig& cfg) {
  FrameState fs;
  fs.frame_idx = packet.frame_idx;
  fs.timestamp = packet.timestamp;
  if (w.frames.empty()) {
    if (!packet.initial_pose) throw InvalidArgument("manage_window: first frame needs a pose");
    fs.pose = *packet.initial_pose;
  } else {
    if (!packet.odometry) throw InvalidArgument("manage_window: missing odometry");
    fs.pose = w.frames.back().pose * packet.odometry->rel;
    w.odometry[packet.frame_idx] = *packet.odometry;
  }
  if (!w.frames.empty() && packet.timestamp <= w.frames.back().timestamp)
    throw InvalidArgument("manage_window: timestamps must be strictly increasing");
  w.frames.push_back(fs);

  for (const auto& [id, uv] : packet.points) {
    auto& lm = w.points[id];
    lm.id = id;
    lm.obs.push_back({packet.frame_idx, uv});
  }
  for (const auto& lo : packet.lines) {
    auto& lm = w.lines[lo.id];
    lm.id = lo.id;
    lm.obs.push_back({packet.frame_idx, lo.s, lo.e, lo.axis});
  }

  // activate landmarks that now have enough baseline
  auto cam_pose = [&](int fidx) { return w.frame(fidx)->pose * cfg.t_bc; };
  for (auto& [id, lm] : w.points) {
    if (lm.active || lm.obs.size() < 2) continue;
    // pair the first observation with the most distant later one
    const PointObs& first = lm.obs.front();
    if (!w.frame(first.frame_idx)) continue;
    double best = -1.0;
    const PointObs* mate = nullptr;
    for (size_t i = 1; i < lm.obs.size(); ++i) {
      if (!w.frame(lm.obs[i].frame_idx)) continue;
      const double bl = (cam_pose(first.frame_idx).t - cam_pose(lm.obs[i].frame_idx).t).norm();
      if (bl > best) {
        best = bl;
        mate = &lm.obs[i];
      }
    }
    if (!mate) continue;
    try {
      lm.inv_depth = triangulate_point(first.uv, mate->uv, cam_pose(first.frame_idx),
                                       cam_pose(mate->frame_idx), cfg.min_baseline_m,
                                       cfg.min_baseline_deg);
      lm.host_frame = first.frame_idx;
      lm.active = true;
    } catch (const Error&) {
    }
  }
  for (auto& [id, lm] : w.lines) {
    if (lm.active || lm.obs.size() < 2) continue;
    const LineObs& first = lm.obs.front();
    if (!w.frame(first.frame_idx)) continue;
    double best = -1.0;
    const LineObs* mate = nullptr;
    for (size_t i = 1; i < lm.obs.size(); ++i) {
      if (!w.frame(lm.obs[i].frame_idx)) continue;
      const double bl = (cam_pose(first.frame_idx).t - cam_pose(lm.obs[i].frame_idx).t).norm();
      if (bl > best) {
        best = bl;
        mate = &lm.obs[i];
      }
    }
    if (!mate) continue;
    try {
      const PluckerLine pl =
          triangulate_line(first.s, first.e, mate->s, mate->e, cam_pose(first.frame_idx),
                           cam_pose(mate->frame_idx), cfg.min_baseline_m, cfg.min_baseline_deg);
      lm.line = plucker_to_orthonormal(pl);
      if (lm.line.phi > 100.0) throw InvalidArgument("line too far");
      lm.active = true;
      // label from observation consensus
      int votes[3] = {0, 0, 0};
      int labeled = 0;
      for (const auto& o : lm.obs) {
        if (o.axis == Axis::None) continue;
        ++votes[int(o.axis)];
        ++labeled;
      }
      lm.axis = Axis::None;
      for (int a = 0; a < 3; ++a)
        if (votes[a] == labeled && labeled >= 2) lm.axis = Axis(a);
    } catch (const Error&) {
    }
  }

  SolveReport report = optimize(w, cfg);

  // re-audit structural labels against the optimized direction
  for (auto& [id, lm] : w.lines) {
    if (!lm.active || lm.axis == Axis::None) continue;
    Eigen::Vector3d ea = Eigen::Vector3d::Zero();
    ea[int(lm.axis)] = 1.0;
    const double dev = std::acos(std::clamp(std::abs(lm.line.psi.col(1).dot(ea)), 0.0, 1.0));
    if (dev > 5.0 * M_PI / 180.0) lm.axis = Axis::None;
  }

  if (int(w.frames.size()) > cfg.window_size) marginalize_oldest(w, cfg);

  // prune observations that fell out of the window
  std::vector<long> dead_points, dead_lines;
  for (auto& [id, lm] : w.points) {
    std::erase_if(lm.obs, [&](const PointObs& o) { return !w.frame(o.frame_idx); });
    if (lm.obs.empty()) dead_points.push_back(id);
  }
  for (auto& [id, lm] : w.lines) {
    std::erase_if(lm.obs, [&](const LineObs& o) { return !w.frame(o.frame_idx); });
    if (lm.obs.empty()) dead_lines.push_back(id);
  }
  for (long id : dead_points) {
    if (w.prior) w.prior->drop_block({BlockKind::Point, int(id)});
    w.points.erase(id);
  }
  for (long id : dead_lines) {
    if (w.prior) w.prior->drop_block({BlockKind::Line, int(id)});
    w.lines.erase(id);
  }
  return report;
}

}  // namespace mwvio
