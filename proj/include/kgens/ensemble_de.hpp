#pragma once

#include "kgens/ensemble_se.hpp"

#include <string>
#include <vector>

namespace kgens {

/// Knowledge-graph embeddings for the training rows, PCA-reduced to the fused
/// dimension (zero-padded when the source cannot supply that many components).
struct KnowledgeSources {
  std::string cnet_id;
  std::string wiki_id;
  Matrix cnet;
  Matrix wiki;
  PcaModel cnet_pca;
  PcaModel wiki_pca;
};

struct KnowledgeSplit {
  KnowledgeSources train;
  Matrix cnet_test;
  Matrix wiki_test;
};

/// PCA per knowledge source, fit on the split's train rows.
KnowledgeSplit reduce_knowledge(const LabeledDataset& dataset, const std::string& cnet_id,
                                const std::string& wiki_id, const SplitPlan& split, std::size_t fused_dim);

struct RewardVector {
  double beta = 0.0;
  std::vector<double> rewards;
  RewardNorm normalization = RewardNorm::shifted;
};

/// R_i = beta * CS(cnet_i, fused_i) + (1 - beta) * CS(wiki_i, fused_i), in
/// [-1,1]; shifted mode maps it to (R+1)/2 in [0,1]. beta = 1 and beta = 0
/// reproduce the single-source similarities exactly.
RewardVector compute_rewards(const Matrix& fused, const Matrix& cnet, const Matrix& wiki, double beta,
                             RewardNorm normalization);

/// Reward-weighted training with rewards fixed up front.
TrainedEnsemble train_de(const FusedDataset& data, const Labels& golds, int classes, const RewardVector& rewards,
                         const TrainConfig& cfg);

TrainedEnsemble train_de(const FusedDataset& data, const Labels& golds, int classes, const KnowledgeSources& kg,
                         double beta, RewardNorm normalization, const TrainConfig& cfg);

struct BetaCandidate {
  double beta = 0.0;
  double validation_accuracy = 0.0;
};

struct BetaFit {
  double beta = 0.0;
  std::vector<BetaCandidate> candidates;
  TrainedEnsemble model;
};

/// Grid search over beta in {0, step, ..., 1}. Each candidate is trained on the
/// first 90% of the training rows and scored on the last 10%; the best
/// validation accuracy wins, ties going to the larger beta. The returned model
/// is retrained on all training rows with the chosen beta.
BetaFit fit_beta(const FusedDataset& data, const Labels& golds, int classes, const KnowledgeSources& kg,
                 double grid_step, RewardNorm normalization, const TrainConfig& cfg, std::size_t jobs = 1);

/// Grid values {0, step, ..., 1} computed as j/N for exactness.
std::vector<double> unit_grid(double grid_step);

} // namespace kgens
