#pragma once

#include "kgens/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace kgens {

struct PcaModel {
  Vector mean;                 // input_dim
  Matrix components;           // output_dim x input_dim, rows orthonormal
  Vector explained_variance;   // output_dim, non-increasing, >= 0

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(components.rows()); }
};

/// Top-k principal directions of the mean-centred sample covariance (n-1
/// denominator). The effective k is min(k, d, n-1). Each component's
/// largest-magnitude entry is positive (first such entry on ties).
PcaModel pca_fit(const Matrix& data, std::size_t target_dim);

/// (data - mean) * components^T.
Matrix pca_transform(const PcaModel& model, const Matrix& data);

/// projected * components + mean.
Matrix pca_reconstruct(const PcaModel& model, const Matrix& projected);

/// Sum of per-column sample variances (n-1 denominator).
double total_variance(const Matrix& data);

/// <u,v> / (|u||v|), clamped to [-1,1]; 0 when either norm is below 1e-12.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(const Vector& u, const Vector& v);

/// Row-wise cosine similarity of two equally shaped matrices.
std::vector<double> row_cosine(const Matrix& a, const Matrix& b);

Vector concat(std::span<const Vector> parts);

/// Column-wise concatenation of row-aligned blocks.
Matrix concat_columns(std::span<const Matrix> blocks);

void save_pca(std::ostream& out, const PcaModel& model);
PcaModel load_pca(std::istream& in);

} // namespace kgens
