#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

namespace gbd {

// Spatial dimension is a runtime value, capped so vectors live on the stack.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using IVec = Eigen::Matrix<long, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

using DynVec = Eigen::VectorXd;
using DynMat = Eigen::MatrixXd;

/// Differences of nominally equal values below this are treated as zero.
inline double roundoff_floor(double magnitude) { return 64.0 * std::numeric_limits<double>::epsilon() * magnitude; }

inline Vec zeros(int d) { return Vec::Zero(d); }

inline Vec unit(int d, int k) {
  Vec e = Vec::Zero(d);
  e(k) = 1.0;
  return e;
}

}  // namespace gbd
