#pragma once

#include <functional>

#include "mwvio/factors/factors.h"

namespace mwvio {

// Re-evaluates the residual with block `block_index` retracted by `delta`
// (all other blocks at their nominal values).
using PerturbedEval =
    std::function<Eigen::VectorXd(size_t block_index, const Eigen::VectorXd& delta)>;

// Central finite differences on every tangent coordinate of every block,
// compared against the analytic Jacobians of `nominal`. Relative error is
// guarded by an absolute floor of 1e-8.
double fd_max_rel_error(const FactorEval& nominal, const PerturbedEval& eval,
                        double step = 1e-6);

struct FactorCheckReport {
  std::string name;
  double max_rel_error = 0.0;
  int trials = 0;
};

// Runs `trials` random instances of every factor type through the finite
// difference oracle. Deterministic for a fixed seed.
std::vector<FactorCheckReport> check_all_factors(unsigned seed, int trials);

}  // namespace mwvio
