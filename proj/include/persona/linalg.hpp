#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace persona {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// n x kLabelCount matrix of 0/1 targets.
using LabelMatrix = Matrix;

using NodeIndex = std::size_t;

}  // namespace persona
