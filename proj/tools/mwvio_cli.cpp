#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mwvio/errors.h"
#include "mwvio/factors/fd_check.h"
#include "mwvio/lineflow/detector.h"
#include "mwvio/lineflow/tracker.h"
#include "mwvio/manhattan/frame.h"
#include "mwvio/pipeline/evaluate.h"
#include "mwvio/pipeline/io.h"
#include "mwvio/pipeline/vio.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mwvio;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

const char* mf_case_name(MfCase c) {
  switch (c) {
    case MfCase::Case1: return "1";
    case MfCase::Case2: return "2";
    case MfCase::Case3: return "3";
    case MfCase::Detect: return "detect";
    default: return "none";
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  SimConfig cfg = config_path.empty() ? SimConfig{} : sim_config_from_file(config_path);
  Dataset ds = simulate_scene(cfg);
  fs::create_directories(out_dir);

  if (cfg.write_images) {
    fs::create_directories(fs::path(out_dir) / "frames");
    char name[64];
    for (auto& f : ds.frames) {
      std::snprintf(name, sizeof(name), "frames/%06d.pgm", f.idx);
      f.image_path = (fs::path(out_dir) / name).string();
      write_pgm(f.image_path, rasterize(ds, f.idx));
    }
  }

  write_dataset((fs::path(out_dir) / "dataset.jsonl").string(), ds);
  Trajectory gt;
  for (const auto& f : ds.frames) {
    gt.entries.push_back({f.timestamp, f.gt_pose.t, f.gt_pose.r.quaternion()});
  }
  write_tum((fs::path(out_dir) / "gt.tum").string(), gt);
  std::printf("wrote %zu frames to %s\n", ds.frames.size(), out_dir.c_str());
  return kExitOk;
}

int cmd_run(const std::string& data_dir, const std::string& out_path,
            const std::string& report_path, bool pixels, bool no_manhattan,
            bool no_struct_lines) {
  Dataset ds = read_dataset((fs::path(data_dir) / "dataset.jsonl").string());
  VioConfig cfg = default_vio_config(ds);
  cfg.pixels_mode = pixels;
  cfg.backend.use_manhattan = !no_manhattan;
  cfg.backend.use_struct_lines = !no_manhattan && !no_struct_lines;

  VioResult res = run_vio(ds, cfg);
  write_tum(out_path, res.trajectory);

  if (!report_path.empty()) {
    json frames = json::array();
    for (const auto& d : res.diagnostics) {
      json jd{{"frame", d.frame_idx},
              {"mf_case", mf_case_name(d.mf_case)},
              {"mf_found", d.mf_found},
              {"line_obs", d.n_line_obs},
              {"point_obs", d.n_point_obs},
              {"solver",
               {{"initial_cost", d.solve.initial_cost},
                {"final_cost", d.solve.final_cost},
                {"iterations", d.solve.iterations},
                {"points", d.solve.n_point},
                {"lines", d.solve.n_line},
                {"mf_terms", d.solve.n_mf},
                {"struct_terms", d.solve.n_struct}}}};
      if (d.verified_frame >= 0) {
        jd["verify"] = {{"frame", d.verified_frame},
                        {"error_deg", d.verify_error_deg},
                        {"accept", d.verify_accept}};
      }
      frames.push_back(jd);
    }
    json report{{"aligned", res.aligned}, {"frames", frames}};
    std::ofstream out(report_path);
    out << report.dump(2) << "\n";
  }
  std::printf("wrote trajectory (%zu poses) to %s\n", res.trajectory.entries.size(),
              out_path.c_str());
  return kExitOk;
}

int cmd_evaluate(const std::string& est_path, const std::string& gt_path) {
  const Trajectory est = read_tum(est_path);
  const Trajectory gt = read_tum(gt_path);
  const double rmse = ate_rmse(est, gt);
  std::printf("ATE RMSE: %.6f m over %zu poses\n", rmse, est.entries.size());
  return kExitOk;
}

int cmd_track_lines(const std::string& prev_path, const std::string& cur_path,
                    const std::string& out_path) {
  const GrayImage prev = read_pgm(prev_path);
  const GrayImage cur = read_pgm(cur_path);
  const ImagePyramid prev_pyr = build_pyramid(prev, 3);
  const ImagePyramid cur_pyr = build_pyramid(cur, 3);

  DetectorParams params;
  const auto lines = detect_lines(prev, params);

  std::ofstream out(out_path);
  if (!out) throw Error("cannot open for writing: " + out_path);
  for (const auto& line : lines) {
    const TrackResult tr = track_line(prev_pyr, cur_pyr, line);
    const char* status = tr.status == TrackStatus::Tracked     ? "Tracked"
                         : tr.status == TrackStatus::Diverged  ? "Diverged"
                                                               : "OutOfBounds";
    json j{{"id", line.id},
           {"start", {tr.line.start.x(), tr.line.start.y()}},
           {"end", {tr.line.end.x(), tr.line.end.y()}},
           {"g", {tr.motion.g1, tr.motion.g2, tr.motion.g3, tr.motion.g4}},
           {"status", status}};
    out << j.dump() << "\n";
  }
  std::printf("tracked %zu lines into %s\n", lines.size(), out_path.c_str());
  return kExitOk;
}

int cmd_detect_mf(const std::string& lines_path, const std::string& out_path, double fx,
                  double fy, double cx, double cy) {
  std::ifstream in(lines_path);
  if (!in) throw Error("cannot open: " + lines_path);
  std::vector<LineSegment2D> lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad JSON: ") + e.what(), line_no);
    }
    LineSegment2D seg;
    seg.id = j.value("id", long(line_no));
    seg.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
    seg.end = {j.at("end").at(0).get<double>(), j.at("end").at(1).get<double>()};
    lines.push_back(seg);
  }

  const CameraIntrinsics intr{fx, fy, cx, cy};
  const auto mf = detect_mf_2line(lines, intr);
  if (!mf) {
    std::fprintf(stderr, "no Manhattan frame found (%zu lines)\n", lines.size());
    return kExitData;
  }
  json j;
  json r = json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r.push_back(mf->r_cm.matrix()(row, col));
  j["r_cm"] = r;
  j["support"] = {mf->support[0], mf->support[1], mf->support[2]};
  std::ofstream out(out_path);
  out << j.dump(2) << "\n";
  std::printf("manhattan frame written to %s\n", out_path.c_str());
  return kExitOk;
}

int cmd_check_jacobians(unsigned seed, int trials) {
  constexpr double kTol = 1e-5;
  const auto reports = check_all_factors(seed, trials);
  bool all_ok = true;
  std::printf("%-20s %10s %12s\n", "factor", "trials", "max rel err");
  for (const auto& r : reports) {
    const bool ok = r.max_rel_error < kTol;
    all_ok = all_ok && ok;
    std::printf("%-20s %10d %12.3e %s\n", r.name.c_str(), r.trials, r.max_rel_error,
                ok ? "ok" : "FAIL");
  }
  return all_ok ? kExitOk : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale visual odometry with line features and Manhattan constraints"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::string sim_config, sim_out = "data";
  sim->add_option("--config", sim_config, "key = value config file");
  sim->add_option("--out", sim_out, "output directory")->required();

  auto* run = app.add_subcommand("run", "run the odometry pipeline");
  std::string run_data, run_out = "traj.tum", run_report;
  bool run_pixels = false, run_no_mh = false, run_no_sl = false;
  run->add_option("--data", run_data, "dataset directory")->required();
  run->add_option("--out", run_out, "estimated trajectory (TUM)");
  run->add_option("--report", run_report, "per-frame diagnostics (JSON)");
  run->add_flag("--pixels", run_pixels, "track lines on rasterized frames");
  run->add_flag("--no-manhattan", run_no_mh, "disable Manhattan and structural terms");
  run->add_flag("--no-struct-lines", run_no_sl, "disable structural line terms");

  auto* eval = app.add_subcommand("evaluate", "ATE RMSE between two TUM trajectories");
  std::string eval_est, eval_gt;
  eval->add_option("--est", eval_est, "estimated trajectory")->required();
  eval->add_option("--gt", eval_gt, "ground-truth trajectory")->required();

  auto* track = app.add_subcommand("track-lines", "detect in one frame, track into the next");
  std::string track_prev, track_cur, track_out = "tracks.jsonl";
  track->add_option("--prev", track_prev, "previous frame (PGM)")->required();
  track->add_option("--cur", track_cur, "current frame (PGM)")->required();
  track->add_option("--out", track_out, "JSON-Lines output");

  auto* dmf = app.add_subcommand("detect-mf", "detect a Manhattan frame from line segments");
  std::string dmf_lines, dmf_out = "mf.json";
  double dmf_fx = 1.0, dmf_fy = 1.0, dmf_cx = 0.0, dmf_cy = 0.0;
  dmf->add_option("--lines", dmf_lines, "JSON-Lines segments")->required();
  dmf->add_option("--out", dmf_out, "output JSON");
  dmf->add_option("--fx", dmf_fx, "focal x (px)");
  dmf->add_option("--fy", dmf_fy, "focal y (px)");
  dmf->add_option("--cx", dmf_cx, "principal point x");
  dmf->add_option("--cy", dmf_cy, "principal point y");

  auto* chk = app.add_subcommand("check-jacobians", "finite-difference factor audit");
  unsigned chk_seed = 7;
  int chk_trials = 100;
  chk->add_option("--seed", chk_seed, "random seed");
  chk->add_option("--trials", chk_trials, "trials per factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
    if (run->parsed())
      return cmd_run(run_data, run_out, run_report, run_pixels, run_no_mh, run_no_sl);
    if (eval->parsed()) return cmd_evaluate(eval_est, eval_gt);
    if (track->parsed()) return cmd_track_lines(track_prev, track_cur, track_out);
    if (dmf->parsed()) return cmd_detect_mf(dmf_lines, dmf_out, dmf_fx, dmf_fy, dmf_cx, dmf_cy);
    if (chk->parsed()) return cmd_check_jacobians(chk_seed, chk_trials);
  } catch (const SolverDiverged& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
