#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mwvio/camera.h"
#include "mwvio/geom/transform.h"
#include "mwvio/lineflow/image.h"
#include "mwvio/lineflow/segment.h"

namespace mwvio {

struct SimConfig {
  unsigned seed = 1;
  std::string trajectory = "circle";  // circle | corridor
  double radius = 2.0;                // m, circle
  double length = 6.0;                // m, corridor
  int n_frames = 100;
  double frame_dt = 0.05;
  int n_lines_per_axis = 30;
  int n_points = 150;
  int image_width = 640;
  int image_height = 480;
  double focal = 460.0;
  double pixel_sigma = 0.0;
  double odom_sigma_rot_deg = 0.0;
  double odom_sigma_trans = 0.0;
  Eigen::Vector3d gravity_world{0.0, 0.0, -1.0};
  bool write_images = false;

  CameraIntrinsics intrinsics() const {
    return {focal, focal, image_width / 2.0, image_height / 2.0};
  }
};

struct SimPointObs {
  long id;
  Eigen::Vector2d uv;  // pixels
};

struct SimLineObs {
  long id;
  Axis axis;               // ground-truth label
  Eigen::Vector2d s, e;    // pixels
};

struct SimFrame {
  int idx = 0;
  double timestamp = 0.0;
  RigidTransform gt_pose;                   // T^W_b (camera == body)
  std::optional<RigidTransform> odometry;   // noisy body-frame relative pose
  std::vector<SimPointObs> points;
  std::vector<SimLineObs> lines;
  std::string image_path;
};

struct Scene {
  struct Line3D {
    long id;
    Axis axis;
    Eigen::Vector3d a, b;
  };
  struct Point3D {
    long id;
    Eigen::Vector3d p;
  };
  std::vector<Line3D> lines;
  std::vector<Point3D> points;
};

struct Dataset {
  SimConfig config;
  Scene scene;
  std::vector<SimFrame> frames;
};

// Box-room Manhattan scene with axis-aligned segments, a smooth trajectory
// and per-frame projections. Deterministic for a fixed seed.
Dataset simulate_scene(const SimConfig& cfg);

// Noise-free projection of the scene's lines in one frame, drawn as dark
// 3 px strokes on a bright noisy background.
GrayImage rasterize(const Dataset& ds, int frame_idx);

// noise-free projected segments of one frame (the rasterizer's input)
std::vector<LineSegment2D> true_projections(const Dataset& ds, int frame_idx);

}  // namespace mwvio
