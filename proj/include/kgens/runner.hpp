#pragma once

#include "kgens/ensemble_de.hpp"
#include "kgens/ensemble_she.hpp"
#include "kgens/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kgens {

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentConfig {
  std::vector<std::string> embedding_paths;  // model sources, order = fusion/ShE order
  std::vector<std::string> kg_paths;         // exactly two when given: cnet, wiki
  std::string labels_path;

  /// "baseline:<source>", "baseline" (every model source), "she", "se", "de".
  std::vector<std::string> methods;
  std::vector<double> fractions{0.10, 0.15, 0.20, 0.25, 0.30};
  std::uint64_t seed = 42;
  TrainConfig train;
  std::size_t pca_dim = 100;
  double alpha_step = 0.1;
  double beta_step = 0.1;
  RewardNorm reward_norm = RewardNorm::shifted;
  std::size_t jobs = 1;
};

/// Dataset plus the roles of its sources.
struct ExperimentInputs {
  LabeledDataset dataset;
  std::vector<std::string> model_sources;
  std::optional<std::string> cnet_id;
  std::optional<std::string> wiki_id;
};

/// Loads labels and EMB files named in the config and aligns them.
ExperimentInputs load_inputs(const ExperimentConfig& config);

struct CellResult {
  std::string method;
  double fraction = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  KappaTerms kappa;
  ConfusionMatrix confusion;
  std::optional<std::vector<double>> alpha;
  std::optional<std::size_t> alpha_train_loss;
  std::optional<double> beta;
  std::vector<BetaCandidate> beta_validation;
};

struct MethodMean {
  std::string method;
  double accuracy = 0.0;
  double kappa = 0.0;
};

struct DatasetSummary {
  std::size_t samples = 0;
  int classes = 0;
  std::vector<std::pair<std::string, std::size_t>> source_dims;
};

struct EvaluationReport {
  ExperimentConfig config;
  DatasetSummary dataset;
  std::vector<std::string> methods;  // expanded, in config order
  std::vector<CellResult> rows;      // method-major, fractions in config order
  std::vector<MethodMean> means;
};

enum class AblationParam { alpha, beta };

struct AblationPoint {
  double value = 0.0;
  double accuracy = 0.0;  // mean over fractions
  double kappa = 0.0;
  std::vector<double> fraction_accuracy;
  std::vector<double> fraction_kappa;
};

struct AblationReport {
  ExperimentConfig config;
  DatasetSummary dataset;
  AblationParam param = AblationParam::alpha;
  std::vector<AblationPoint> points;  // ascending by value
};

/// Expands and validates method names against the inputs.
std::vector<std::string> expand_methods(const ExperimentConfig& config, const ExperimentInputs& inputs);

/// Seed of one (method, fraction) cell: derive_seed(seed, "<method>|<fraction>").
std::uint64_t cell_seed(std::uint64_t seed, const std::string& method, double fraction);

EvaluationReport run(const ExperimentConfig& config, const ExperimentInputs& inputs);
EvaluationReport run(const ExperimentConfig& config);

/// Test metrics with the parameter frozen at each grid value, averaged over
/// the configured fractions. alpha needs exactly two model sources; beta needs
/// both knowledge sources. Seeds match run(), so a point at the fitted value
/// reproduces the corresponding run() cell.
AblationReport ablate(const ExperimentConfig& config, const ExperimentInputs& inputs, AblationParam param,
                      std::vector<double> grid);
AblationReport ablate(const ExperimentConfig& config, AblationParam param, std::vector<double> grid);

std::string to_string(AblationParam p);

} // namespace kgens
