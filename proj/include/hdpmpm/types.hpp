#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace hdpmpm {

using Eigen::VectorXd;
using Eigen::VectorXi;

// Row-major layouts for everything accessed person-by-person in the sweep.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXi = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace hdpmpm
