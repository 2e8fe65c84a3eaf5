#pragma once

#include <Eigen/Core>

namespace fagp {

// Row-major so that one sample (or one feature row) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace fagp
