#pragma once

#include <Eigen/Dense>

namespace trajmc {

inline constexpr int kStateDim = 7;
inline constexpr int kAugmentedDim = 14;

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Vec14 = Eigen::Matrix<double, 14, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat14 = Eigen::Matrix<double, 14, 14>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Free initial costates: (λr1, λr2, λv1, λv2) for planar problems,
/// (λr, λv) for spatial ones. The mass costate is fixed at -1 and is
/// never part of a sample.
using CostateSample = Eigen::VectorXd;

/// Index layout of the augmented state/costate vector.
namespace idx {
inline constexpr int r = 0;
inline constexpr int v = 3;
inline constexpr int m = 6;
inline constexpr int lr = 7;
inline constexpr int lv = 10;
inline constexpr int lm = 13;
}  // namespace idx

}  // namespace trajmc
