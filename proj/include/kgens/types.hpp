#pragma once

#include <Eigen/Core>

#include <vector>

namespace kgens {

// Storage precision (on disk, embeddings, network parameters).
using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Compute precision.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Zero-based class labels.
using Labels = std::vector<int>;

using Indices = std::vector<std::size_t>;

} // namespace kgens
