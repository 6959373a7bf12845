#include "mwvio/pipeline/evaluate.h"

#include <cmath>

#include "mwvio/errors.h"

namespace mwvio {

RigidTransform umeyama_alignment(const std::vector<Eigen::Vector3d>& src,
                                 const std::vector<Eigen::Vector3d>& dst) {
  const size_t n = src.size();
  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero(), mu_d = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= double(n);
  mu_d /= double(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < n; ++i) cov += (dst[i] - mu_d) * (src[i] - mu_s).transpose();
  cov /= double(n);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s(1.0, 1.0,
                    (svd.matrixU() * svd.matrixV().transpose()).determinant() > 0 ? 1.0 : -1.0);
  const Eigen::Matrix3d r = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return {Rotation::unchecked(r), mu_d - r * mu_s};
}

double ate_rmse(const Trajectory& est, const Trajectory& gt) {
  constexpr double kMaxDt = 0.010;
  std::vector<Eigen::Vector3d> src, dst;
  size_t j = 0;
  for (const auto& e : est.entries) {
    while (j + 1 < gt.entries.size() &&
           std::abs(gt.entries[j + 1].t - e.t) <= std::abs(gt.entries[j].t - e.t))
      ++j;
    if (j < gt.entries.size() && std::abs(gt.entries[j].t - e.t) <= kMaxDt) {
      src.push_back(e.p);
      dst.push_back(gt.entries[j].p);
    }
  }
  if (src.size() < 3) throw NoOverlap("ate_rmse: fewer than 3 associated timestamps");

  const RigidTransform t = umeyama_alignment(src, dst);
  double sum = 0.0;
  for (size_t i = 0; i < src.size(); ++i) sum += (t * src[i] - dst[i]).squaredNorm();
  return std::sqrt(sum / double(src.size()));
}

}  // namespace mwvio
