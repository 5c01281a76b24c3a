#pragma once

#include "kgens/classifier.hpp"
#include "kgens/dataset_io.hpp"
#include "kgens/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kgens {

inline constexpr std::uint8_t kEnsembleVersion = 1;

/// Post-PCA concatenation of several sources' embeddings for the training rows.
struct FusedDataset {
  Matrix fused;
  PcaModel pca;
  std::vector<std::string> source_order;
};

struct FusedSplit {
  FusedDataset train;
  Matrix test;
};

enum class Strategy { baseline, shallow, semi, deep };
enum class RewardNorm { shifted, raw };

std::string to_string(Strategy s);
std::string to_string(RewardNorm n);
RewardNorm parse_reward_norm(const std::string& name);

/// A fitted fusion + classifier, ready to predict on new rows.
struct TrainedEnsemble {
  Strategy strategy = Strategy::semi;
  std::vector<std::string> source_order;
  PcaModel pca;
  Network network;
  std::optional<double> beta;
  RewardNorm reward_norm = RewardNorm::shifted;

  /// "ENSV" blob embedding the PCA model and the NETV network blob.
  void save(std::ostream& out) const;
  static TrainedEnsemble load(std::istream& in);
};

struct Prediction {
  Labels labels;
  Matrix probs;
};

/// Row-wise concatenation of the listed sources (in order) for the given rows.
Matrix concat_sources(const LabeledDataset& dataset, std::span<const std::string> sources,
                      std::span<const std::size_t> rows);

/// Concatenate `sources` in order, fit PCA on the train rows only, and project
/// both splits. Output dim is min(target_dim, total dim, n_train - 1).
FusedSplit fuse(const LabeledDataset& dataset, std::span<const std::string> sources, const SplitPlan& split,
                std::size_t target_dim);

/// Classifier input layout for a fused dataset under a training config.
NetworkLayout layout_for(std::size_t input_dim, int classes, const TrainConfig& cfg);

/// Plain cross-entropy training on fused features; cfg.loss is forced to plain.
TrainedEnsemble train_se(const FusedDataset& train, const Labels& golds, int classes, const TrainConfig& cfg);

/// Fuse the given rows with the stored PCA, then run the network.
Prediction predict_ensemble(const TrainedEnsemble& model, const LabeledDataset& dataset,
                            std::span<const std::size_t> rows);

/// Predict on the split's test rows.
Prediction predict_se(const TrainedEnsemble& model, const LabeledDataset& dataset, const SplitPlan& split);

/// Predict on already-fused rows.
Prediction predict_fused(const TrainedEnsemble& model, const Matrix& fused);

} // namespace kgens
