#pragma once

#include "mwvio/geom/transform.h"
#include "mwvio/pipeline/io.h"

namespace mwvio {

// Nearest-neighbor association within 10 ms, Umeyama SE(3) alignment without
// scale, RMSE of the aligned position residuals.
double ate_rmse(const Trajectory& est, const Trajectory& gt);

// the alignment computed inside ate_rmse, exposed for inspection
RigidTransform umeyama_alignment(const std::vector<Eigen::Vector3d>& src,
                                 const std::vector<Eigen::Vector3d>& dst);

}  // namespace mwvio
