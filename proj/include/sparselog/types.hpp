#pragma once

#include <Eigen/Dense>

namespace sparselog {

using Vec = Eigen::VectorXd;
/// Row-major so that one sample is one contiguous row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;

}  // namespace sparselog
