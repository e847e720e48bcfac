#pragma once

#include <Eigen/Core>

namespace bsvm {

// Feature matrices are row-major so that each observation is a contiguous
// span, which is what the distance kernels in simd.hpp consume.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace bsvm
