#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mwvio/errors.h"

namespace mwvio {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // row-major intensities in [0, 255]

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f) : width(w), height(h), data(size_t(w) * h, fill) {}

  float at(int x, int y) const { return data[size_t(y) * width + x]; }
  float& at(int x, int y) { return data[size_t(y) * width + x]; }

  bool contains(double x, double y, double margin = 0.0) const {
    return x >= margin && y >= margin && x <= width - 1 - margin && y <= height - 1 - margin;
  }

  // bilinear sample, clamped at the border
  float sample(double x, double y) const;

  // central-difference gradient with bilinear sub-pixel lookups
  Eigen::Vector2d gradient(double x, double y) const;
};

struct ImagePyramid {
  std::vector<GrayImage> levels;  // levels[0] is the input image

  int level_count() const { return int(levels.size()); }
  const GrayImage& level(int i) const { return levels[i]; }
};

// Each level is a 2x2 box-filtered downsample of the previous one.
// levels must be in [2, 5] and the smallest level at least 16 px per side.
ImagePyramid build_pyramid(const GrayImage& img, int levels);

}  // namespace mwvio
