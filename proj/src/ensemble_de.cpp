#include "kgens/ensemble_de.hpp"

#include "kgens/error.hpp"
#include "kgens/metrics.hpp"
#include "parallel.hpp"

#include <cmath>

namespace kgens {

namespace {

Matrix pad_columns(Matrix m, Eigen::Index cols) {
  if (m.cols() >= cols) return m;
  Matrix out = Matrix::Zero(m.rows(), cols);
  out.leftCols(m.cols()) = m;
  return out;
}

Matrix slice_rows(const Matrix& m, Eigen::Index first, Eigen::Index count) {
  return m.middleRows(first, count);
}

} // namespace

std::vector<double> unit_grid(double grid_step) {
  require(grid_step > 0.0 && grid_step <= 1.0, ErrorKind::InvalidArgument, "grid step must lie in (0,1]");
  const double steps = 1.0 / grid_step;
  const auto n = std::llround(steps);
  require(std::abs(steps - static_cast<double>(n)) < 1e-9 * steps, ErrorKind::InvalidArgument,
          "grid step must divide 1 evenly");
  std::vector<double> grid;
  for (long long j = 0; j <= n; ++j) grid.push_back(static_cast<double>(j) / static_cast<double>(n));
  return grid;
}

KnowledgeSplit reduce_knowledge(const LabeledDataset& dataset, const std::string& cnet_id,
                                const std::string& wiki_id, const SplitPlan& split, std::size_t fused_dim) {
  require(!split.train.empty(), ErrorKind::EmptySplit, "knowledge reduction needs training rows");
  KnowledgeSplit out;
  out.train.cnet_id = cnet_id;
  out.train.wiki_id = wiki_id;
  const auto k = static_cast<Eigen::Index>(fused_dim);

  auto reduce = [&](const std::string& id, Matrix& train_out, Matrix& test_out, PcaModel& pca) {
    const auto& source = dataset.source(id);
    const Matrix train_raw = gather_rows(source.vectors, split.train);
    pca = pca_fit(train_raw, fused_dim);
    train_out = pad_columns(pca_transform(pca, train_raw), k);
    test_out = split.test.empty() ? Matrix(0, k)
                                  : pad_columns(pca_transform(pca, gather_rows(source.vectors, split.test)), k);
  };
  reduce(cnet_id, out.train.cnet, out.cnet_test, out.train.cnet_pca);
  reduce(wiki_id, out.train.wiki, out.wiki_test, out.train.wiki_pca);
  return out;
}

RewardVector compute_rewards(const Matrix& fused, const Matrix& cnet, const Matrix& wiki, double beta,
                             RewardNorm normalization) {
  require(beta >= 0.0 && beta <= 1.0, ErrorKind::InvalidArgument, "beta must lie in [0,1]");
  require(fused.rows() == cnet.rows() && fused.rows() == wiki.rows(), ErrorKind::DimensionMismatch,
          "fused and knowledge matrices differ in row count");
  require(fused.cols() == cnet.cols() && fused.cols() == wiki.cols(), ErrorKind::DimensionMismatch,
          "fused and knowledge matrices differ in dimension");
  const auto cs_cnet = row_cosine(cnet, fused);
  const auto cs_wiki = row_cosine(wiki, fused);
  RewardVector out;
  out.beta = beta;
  out.normalization = normalization;
  out.rewards.resize(cs_cnet.size());
  for (std::size_t i = 0; i < cs_cnet.size(); ++i) {
    // std::lerp is exact at both endpoints and when the two terms coincide.
    const double raw = std::lerp(cs_wiki[i], cs_cnet[i], beta);
    out.rewards[i] = normalization == RewardNorm::shifted ? (raw + 1.0) / 2.0 : raw;
  }
  return out;
}

TrainedEnsemble train_de(const FusedDataset& data, const Labels& golds, int classes, const RewardVector& rewards,
                         const TrainConfig& cfg) {
  require(rewards.rewards.size() == static_cast<std::size_t>(data.fused.rows()), ErrorKind::DimensionMismatch,
          "one reward per training row required");
  TrainConfig weighted = cfg;
  weighted.loss = LossKind::reward_weighted_ce;
  TrainedEnsemble model;
  model.strategy = Strategy::deep;
  model.source_order = data.source_order;
  model.pca = data.pca;
  model.beta = rewards.beta;
  model.reward_norm = rewards.normalization;
  model.network =
      train(Network::init(layout_for(static_cast<std::size_t>(data.fused.cols()), classes, weighted), weighted.seed),
            data.fused, golds, rewards.rewards, weighted);
  return model;
}

TrainedEnsemble train_de(const FusedDataset& data, const Labels& golds, int classes, const KnowledgeSources& kg,
                         double beta, RewardNorm normalization, const TrainConfig& cfg) {
  return train_de(data, golds, classes, compute_rewards(data.fused, kg.cnet, kg.wiki, beta, normalization), cfg);
}

BetaFit fit_beta(const FusedDataset& data, const Labels& golds, int classes, const KnowledgeSources& kg,
                 double grid_step, RewardNorm normalization, const TrainConfig& cfg, std::size_t jobs) {
  const auto m = data.fused.rows();
  require(m >= 10, ErrorKind::InvalidArgument,
          "beta selection needs at least 10 training rows for a holdout, got " + std::to_string(m));
  require(static_cast<std::size_t>(m) == golds.size(), ErrorKind::DimensionMismatch, "labels do not match rows");
  const auto grid = unit_grid(grid_step);

  const Eigen::Index n_val = std::max<Eigen::Index>(1, std::llround(0.1 * static_cast<double>(m)));
  const Eigen::Index n_fit = m - n_val;
  FusedDataset fit_part;
  fit_part.fused = slice_rows(data.fused, 0, n_fit);
  fit_part.pca = data.pca;
  fit_part.source_order = data.source_order;
  const Matrix val_fused = slice_rows(data.fused, n_fit, n_val);
  const Labels fit_golds(golds.begin(), golds.begin() + n_fit);
  const Labels val_golds(golds.begin() + n_fit, golds.end());
  const Matrix fit_cnet = slice_rows(kg.cnet, 0, n_fit);
  const Matrix fit_wiki = slice_rows(kg.wiki, 0, n_fit);

  BetaFit out;
  out.candidates.resize(grid.size());
  detail::parallel_for(grid.size(), jobs, [&](std::size_t j) {
    const auto rewards = compute_rewards(fit_part.fused, fit_cnet, fit_wiki, grid[j], normalization);
    const auto model = train_de(fit_part, fit_golds, classes, rewards, cfg);
    out.candidates[j] = {grid[j], accuracy(predict_fused(model, val_fused).labels, val_golds)};
  });

  std::size_t best = grid.size() - 1;
  for (std::size_t j = grid.size() - 1; j-- > 0;)
    if (out.candidates[j].validation_accuracy > out.candidates[best].validation_accuracy) best = j;
  out.beta = grid[best];
  out.model = train_de(data, golds, classes, kg, out.beta, normalization, cfg);
  return out;
}

} // namespace kgens
