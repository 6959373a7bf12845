#include "mwvio/pipeline/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mwvio/errors.h"

namespace mwvio {

using nlohmann::json;

void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      row[x] = (unsigned char)(std::clamp(std::lround(img.at(x, y)), 0l, 255l));
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  auto next_token = [&]() {
    std::string tok;
    while (in) {
      in >> tok;
      if (!tok.empty() && tok[0] == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      return tok;
    }
    throw ParseError("unexpected end of PGM header in " + path, 0);
  };
  if (next_token() != "P5") throw ParseError("not a binary PGM: " + path, 1);
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval != 255)
    throw ParseError("unsupported PGM geometry in " + path, 1);
  in.get();  // single whitespace after maxval
  GrayImage img(w, h);
  std::vector<unsigned char> row(w);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size());
    if (!in) throw ParseError("truncated PGM payload in " + path, 0);
    for (int x = 0; x < w; ++x) img.at(x, y) = float(row[x]);
  }
  return img;
}

namespace {

json pose_to_json(const RigidTransform& t) {
  const Eigen::Quaterniond q = t.r.quaternion();
  return json{{"p", {t.t.x(), t.t.y(), t.t.z()}}, {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

RigidTransform pose_from_json(const json& j) {
  const auto& p = j.at("p");
  const auto& q = j.at("q");
  Eigen::Quaterniond quat(q.at(3).get<double>(), q.at(0).get<double>(), q.at(1).get<double>(),
                          q.at(2).get<double>());
  if (std::abs(quat.norm() - 1.0) > 1e-3)
    throw InvalidArgument("pose quaternion norm violates tolerance");
  return {Rotation::from_quaternion(quat),
          {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()}};
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
    default: return "none";
  }
}

Axis axis_from_name(const std::string& s) {
  if (s == "X") return Axis::X;
  if (s == "Y") return Axis::Y;
  if (s == "Z") return Axis::Z;
  return Axis::None;
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);

  const SimConfig& c = ds.config;
  json meta{{"type", "meta"},
            {"seed", c.seed},
            {"trajectory", c.trajectory},
            {"radius", c.radius},
            {"length", c.length},
            {"n_frames", c.n_frames},
            {"frame_dt", c.frame_dt},
            {"n_lines_per_axis", c.n_lines_per_axis},
            {"n_points", c.n_points},
            {"image_width", c.image_width},
            {"image_height", c.image_height},
            {"focal", c.focal},
            {"pixel_sigma", c.pixel_sigma},
            {"odom_sigma_rot_deg", c.odom_sigma_rot_deg},
            {"odom_sigma_trans", c.odom_sigma_trans},
            {"gravity", {c.gravity_world.x(), c.gravity_world.y(), c.gravity_world.z()}}};
  out << meta.dump() << "\n";

  json scene{{"type", "scene"}};
  json slines = json::array();
  for (const auto& l : ds.scene.lines) {
    slines.push_back(json{{"id", l.id},
                          {"axis", axis_name(l.axis)},
                          {"a", {l.a.x(), l.a.y(), l.a.z()}},
                          {"b", {l.b.x(), l.b.y(), l.b.z()}}});
  }
  json spoints = json::array();
  for (const auto& p : ds.scene.points) {
    spoints.push_back(json{{"id", p.id}, {"p", {p.p.x(), p.p.y(), p.p.z()}}});
  }
  scene["lines"] = std::move(slines);
  scene["points"] = std::move(spoints);
  out << scene.dump() << "\n";

  for (const auto& f : ds.frames) {
    json jf{{"type", "frame"}, {"idx", f.idx}, {"timestamp", f.timestamp}};
    jf["gt_pose"] = pose_to_json(f.gt_pose);
    if (f.odometry) jf["odometry"] = pose_to_json(*f.odometry);
    if (!f.image_path.empty()) jf["image"] = f.image_path;
    json pts = json::array();
    for (const auto& p : f.points)
      pts.push_back(json{{"id", p.id}, {"uv", {p.uv.x(), p.uv.y()}}});
    json lns = json::array();
    for (const auto& l : f.lines)
      lns.push_back(json{{"id", l.id},
                         {"axis", axis_name(l.axis)},
                         {"s", {l.s.x(), l.s.y()}},
                         {"e", {l.e.x(), l.e.y()}}});
    jf["points"] = std::move(pts);
    jf["lines"] = std::move(lns);
    out << jf.dump() << "\n";
  }
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  Dataset ds;
  std::string line;
  int line_no = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad JSON: ") + e.what(), line_no);
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (type == "meta") {
        SimConfig& c = ds.config;
        c.seed = j.at("seed").get<unsigned>();
        c.trajectory = j.at("trajectory").get<std::string>();
        c.radius = j.at("radius").get<double>();
        c.length = j.at("length").get<double>();
        c.n_frames = j.at("n_frames").get<int>();
        c.frame_dt = j.at("frame_dt").get<double>();
        c.n_lines_per_axis = j.at("n_lines_per_axis").get<int>();
        c.n_points = j.at("n_points").get<int>();
        c.image_width = j.at("image_width").get<int>();
        c.image_height = j.at("image_height").get<int>();
        c.focal = j.at("focal").get<double>();
        c.pixel_sigma = j.at("pixel_sigma").get<double>();
        c.odom_sigma_rot_deg = j.at("odom_sigma_rot_deg").get<double>();
        c.odom_sigma_trans = j.at("odom_sigma_trans").get<double>();
        const auto& g = j.at("gravity");
        c.gravity_world = {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()};
        have_meta = true;
      } else if (type == "scene") {
        for (const auto& l : j.at("lines")) {
          Scene::Line3D sl;
          sl.id = l.at("id").get<long>();
          sl.axis = axis_from_name(l.at("axis").get<std::string>());
          const auto& a = l.at("a");
          const auto& b = l.at("b");
          sl.a = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
          sl.b = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()};
          ds.scene.lines.push_back(sl);
        }
        for (const auto& p : j.at("points")) {
          Scene::Point3D sp;
          sp.id = p.at("id").get<long>();
          const auto& v = p.at("p");
          sp.p = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
          ds.scene.points.push_back(sp);
        }
      } else if (type == "frame") {
        SimFrame f;
        f.idx = j.at("idx").get<int>();
        f.timestamp = j.at("timestamp").get<double>();
        f.gt_pose = pose_from_json(j.at("gt_pose"));
        if (j.contains("odometry")) f.odometry = pose_from_json(j.at("odometry"));
        if (j.contains("image")) f.image_path = j.at("image").get<std::string>();
        for (const auto& p : j.at("points")) {
          SimPointObs o;
          o.id = p.at("id").get<long>();
          o.uv = {p.at("uv").at(0).get<double>(), p.at("uv").at(1).get<double>()};
          f.points.push_back(o);
        }
        for (const auto& l : j.at("lines")) {
          SimLineObs o;
          o.id = l.at("id").get<long>();
          o.axis = axis_from_name(l.at("axis").get<std::string>());
          o.s = {l.at("s").at(0).get<double>(), l.at("s").at(1).get<double>()};
          o.e = {l.at("e").at(0).get<double>(), l.at("e").at(1).get<double>()};
          f.lines.push_back(o);
        }
        ds.frames.push_back(std::move(f));
      } else {
        throw ParseError("unknown record type: " + type, line_no);
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad dataset record: ") + e.what(), line_no);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!have_meta) throw ParseError("dataset has no meta record: " + path, 0);
  return ds;
}

void write_tum(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  char buf[256];
  for (const auto& e : traj.entries) {
    std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", e.t, e.p.x(),
                  e.p.y(), e.p.z(), e.q.x(), e.q.y(), e.q.z(), e.q.w());
    out << buf;
  }
}

Trajectory read_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Trajectory::Entry e;
    double qx, qy, qz, qw;
    if (!(ss >> e.t >> e.p.x() >> e.p.y() >> e.p.z() >> qx >> qy >> qz >> qw)) {
      int col = int(ss.tellg());
      throw ParseError("malformed TUM line", line_no, col < 0 ? int(line.size()) : col);
    }
    e.q = Eigen::Quaterniond(qw, qx, qy, qz);
    if (std::abs(e.q.norm() - 1.0) > 1e-3)
      throw ParseError("quaternion norm violates the 1e-3 tolerance", line_no);
    e.q.normalize();
    traj.entries.push_back(e);
  }
  return traj;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", line_no, int(line.size()));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no, 0);
    kv[key] = value;
  }
  return kv;
}

SimConfig sim_config_from_file(const std::string& path) {
  auto kv = read_config_file(path);
  SimConfig c;
  auto get = [&](const char* key, auto& target) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    using T = std::decay_t<decltype(target)>;
    if constexpr (std::is_same_v<T, std::string>) {
      target = it->second;
    } else if constexpr (std::is_same_v<T, unsigned>) {
      target = unsigned(std::stoul(it->second));
    } else if constexpr (std::is_same_v<T, int>) {
      target = std::stoi(it->second);
    } else if constexpr (std::is_same_v<T, bool>) {
      target = it->second == "true" || it->second == "1";
    } else {
      target = std::stod(it->second);
    }
  };
  get("seed", c.seed);
  get("trajectory", c.trajectory);
  get("radius", c.radius);
  get("length", c.length);
  get("n_frames", c.n_frames);
  get("frame_dt", c.frame_dt);
  get("n_lines_per_axis", c.n_lines_per_axis);
  get("n_points", c.n_points);
  get("image_width", c.image_width);
  get("image_height", c.image_height);
  get("focal", c.focal);
  get("pixel_sigma", c.pixel_sigma);
  get("odom_sigma_rot_deg", c.odom_sigma_rot_deg);
  get("odom_sigma_trans", c.odom_sigma_trans);
  get("write_images", c.write_images);
  double gx = c.gravity_world.x(), gy = c.gravity_world.y(), gz = c.gravity_world.z();
  get("gravity_x", gx);
  get("gravity_y", gy);
  get("gravity_z", gz);
  c.gravity_world = {gx, gy, gz};
  return c;
}

}  // namespace mwvio
