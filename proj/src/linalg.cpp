#include "kgens/linalg.hpp"

#include "kgens/error.hpp"
#include "serialize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace kgens {

namespace {

Vector column_mean(const Matrix& data) {
  Vector mean = Vector::Zero(data.cols());
  for (Eigen::Index r = 0; r < data.rows(); ++r) mean += data.row(r).transpose();
  return mean / static_cast<double>(data.rows());
}

// Eigen is built without OpenMP here, so the product is single-threaded and
// its summation order is fixed for a given build.
Matrix covariance(const Matrix& centred) {
  Matrix cov = centred.transpose() * centred;
  cov /= static_cast<double>(centred.rows() - 1);
  return cov;
}

} // namespace

PcaModel pca_fit(const Matrix& data, std::size_t target_dim) {
  const auto n = static_cast<std::size_t>(data.rows());
  const auto d = static_cast<std::size_t>(data.cols());
  require(n >= 2, ErrorKind::InvalidArgument, "PCA needs at least 2 rows, got " + std::to_string(n));
  require(d >= 1, ErrorKind::InvalidArgument, "PCA needs at least 1 column");
  require(target_dim >= 1, ErrorKind::InvalidArgument, "PCA target dimension must be positive");
  require(data.allFinite(), ErrorKind::NonFinite, "PCA input contains non-finite values");
  const std::size_t k = std::min({target_dim, d, n - 1});

  PcaModel model;
  model.mean = column_mean(data);
  Matrix centred = data.rowwise() - model.mean.transpose();
  const Matrix cov = covariance(centred);

  // Eigen returns eigenvalues in ascending order.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, ErrorKind::Degenerate, "covariance eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  model.explained_variance.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - i);
    Eigen::VectorXd direction = vectors.col(src);
    direction.normalize();
    Eigen::Index pivot = 0;
    for (Eigen::Index j = 1; j < direction.size(); ++j)
      if (std::abs(direction(j)) > std::abs(direction(pivot))) pivot = j;
    if (direction(pivot) < 0.0) direction = -direction;
    model.components.row(static_cast<Eigen::Index>(i)) = direction.transpose();
    model.explained_variance(static_cast<Eigen::Index>(i)) = std::max(0.0, values(src));
  }
  // Clamping tiny negative eigenvalues can break monotonicity by an ulp.
  for (Eigen::Index i = 1; i < model.explained_variance.size(); ++i)
    model.explained_variance(i) = std::min(model.explained_variance(i), model.explained_variance(i - 1));
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& data) {
  require(static_cast<std::size_t>(data.cols()) == model.input_dim(), ErrorKind::DimensionMismatch,
          "PCA expects " + std::to_string(model.input_dim()) + " columns, got " + std::to_string(data.cols()));
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& projected) {
  require(static_cast<std::size_t>(projected.cols()) == model.output_dim(), ErrorKind::DimensionMismatch,
          "PCA reconstruction expects " + std::to_string(model.output_dim()) + " columns");
  Matrix out = projected * model.components;
  return out.rowwise() + model.mean.transpose();
}

double total_variance(const Matrix& data) {
  require(data.rows() >= 2, ErrorKind::InvalidArgument, "variance needs at least 2 rows");
  const Vector mean = column_mean(data);
  double total = 0.0;
  for (Eigen::Index r = 0; r < data.rows(); ++r) total += (data.row(r) - mean.transpose()).squaredNorm();
  return total / static_cast<double>(data.rows() - 1);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), ErrorKind::DimensionMismatch,
          "cosine similarity of " + std::to_string(u.size()) + "- and " + std::to_string(v.size()) + "-dim vectors");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

double cosine_similarity(const Vector& u, const Vector& v) {
  return cosine_similarity(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                           std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

std::vector<double> row_cosine(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimensionMismatch,
          "row cosine needs equally shaped matrices");
  std::vector<double> out(static_cast<std::size_t>(a.rows()));
  const auto cols = static_cast<std::size_t>(a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    out[static_cast<std::size_t>(r)] =
        cosine_similarity(std::span<const double>(a.row(r).data(), cols), std::span<const double>(b.row(r).data(), cols));
  return out;
}

Vector concat(std::span<const Vector> parts) {
  require(!parts.empty(), ErrorKind::InvalidArgument, "concat of an empty list");
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector out(total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

Matrix concat_columns(std::span<const Matrix> blocks) {
  require(!blocks.empty(), ErrorKind::InvalidArgument, "concat of an empty list");
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    require(b.rows() == blocks.front().rows(), ErrorKind::DimensionMismatch, "concat blocks differ in row count");
    cols += b.cols();
  }
  Matrix out(blocks.front().rows(), cols);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.middleCols(offset, b.cols()) = b;
    offset += b.cols();
  }
  return out;
}

void save_pca(std::ostream& out, const PcaModel& model) {
  detail::write_u32(out, static_cast<std::uint32_t>(model.input_dim()));
  detail::write_u32(out, static_cast<std::uint32_t>(model.output_dim()));
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) detail::write_f64(out, model.mean(i));
  for (Eigen::Index i = 0; i < model.explained_variance.size(); ++i) detail::write_f64(out, model.explained_variance(i));
  for (Eigen::Index r = 0; r < model.components.rows(); ++r)
    for (Eigen::Index c = 0; c < model.components.cols(); ++c) detail::write_f64(out, model.components(r, c));
}

PcaModel load_pca(std::istream& in) {
  const auto d = detail::read_u32(in);
  const auto k = detail::read_u32(in);
  require(k <= d, ErrorKind::Parse, "PCA blob declares more components than inputs");
  PcaModel model;
  model.mean.resize(d);
  model.explained_variance.resize(k);
  model.components.resize(k, d);
  for (std::uint32_t i = 0; i < d; ++i) model.mean(i) = detail::read_f64(in);
  for (std::uint32_t i = 0; i < k; ++i) model.explained_variance(i) = detail::read_f64(in);
  for (std::uint32_t r = 0; r < k; ++r)
    for (std::uint32_t c = 0; c < d; ++c) model.components(r, c) = detail::read_f64(in);
  return model;
}

} // namespace kgens
