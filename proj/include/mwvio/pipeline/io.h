#pragma once

#include <map>
#include <string>

#include "mwvio/pipeline/sim.h"

namespace mwvio {

struct Trajectory {
  struct Entry {
    double t = 0.0;
    Eigen::Vector3d p{0, 0, 0};
    Eigen::Quaterniond q{1, 0, 0, 0};
  };
  std::vector<Entry> entries;
};

// 8-bit binary PGM (P5)
void write_pgm(const std::string& path, const GrayImage& img);
GrayImage read_pgm(const std::string& path);

// JSON-Lines dataset: a meta object followed by one frame object per line
void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

// TUM format: "timestamp tx ty tz qx qy qz qw", 9-decimal fixed point
void write_tum(const std::string& path, const Trajectory& traj);
Trajectory read_tum(const std::string& path);

// plain-text key = value with '#' comments
std::map<std::string, std::string> read_config_file(const std::string& path);
SimConfig sim_config_from_file(const std::string& path);

}  // namespace mwvio
