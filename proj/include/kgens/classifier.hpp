#pragma once

#include "kgens/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kgens {

inline constexpr std::uint8_t kNetVersion = 1;

enum class Activation { relu, tanh };
enum class LossKind { plain_ce, reward_weighted_ce };

/// `fixed` weights the positive cross-entropy by the reward. `verbatim` uses the
/// opposite sign (the weighted log-likelihood itself); it exists only for
/// comparison runs and diverges by construction.
enum class LossSign { fixed, verbatim };

struct NetworkLayout {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 2;
  Activation activation = Activation::relu;

  void validate() const;
  std::size_t parameter_count() const;
};

struct TrainConfig {
  std::size_t batch_size = 8;
  double learning_rate = 2e-5;
  double weight_decay = 1e-6;
  std::size_t epochs = 20;
  std::uint64_t seed = 42;
  LossKind loss = LossKind::plain_ce;
  LossSign loss_sign = LossSign::fixed;

  std::vector<std::size_t> hidden{64};
  Activation activation = Activation::relu;

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean per-sample loss seen during each epoch
  std::uint64_t steps = 0;
};

/// Fully connected softmax classifier. Parameters are stored as float32 in one
/// flat buffer (per layer: weights out x in row-major, then biases); every
/// forward/backward pass accumulates in double.
class Network {
public:
  Network() = default;

  /// Fan-in scaled uniform weights (limit sqrt(6/fan_in) before a rectifier,
  /// sqrt(3/fan_in) otherwise), zero biases.
  static Network init(const NetworkLayout& layout, std::uint64_t seed);

  const NetworkLayout& layout() const { return layout_; }
  std::span<const float> parameters() const { return params_; }
  std::span<float> parameters() { return params_; }
  std::uint64_t step() const { return step_; }

  Vector forward(std::span<const double> x) const;
  Vector forward(const Vector& x) const;
  Matrix predict_proba(const Matrix& inputs) const;
  Labels predict(const Matrix& inputs) const;

  void save(std::ostream& out) const;
  static Network load(std::istream& in);

  friend Network train(Network net, const Matrix& inputs, const Labels& golds, std::span<const double> rewards,
                       const TrainConfig& cfg, TrainTrace* trace);

private:
  NetworkLayout layout_;
  std::vector<float> params_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  std::uint64_t step_ = 0;
};

/// -log p[gold] with p clamped to [1e-12, 1 - 1e-12].
double loss_ce(std::span<const double> probs, int gold);
double loss_ce(const Vector& probs, int gold);

/// reward * loss_ce.
double loss_reward_weighted(std::span<const double> probs, int gold, double reward);

/// Per-sample loss `weight * CE` and its exact gradient with respect to every
/// parameter (same flat layout as Network::parameters()). The loss is computed
/// from logits via log-sum-exp, clamped to the same range as loss_ce.
double loss_gradient(const Network& net, std::span<const double> x, int gold, double weight,
                     std::vector<double>& gradient);

/// AdamW mini-batch training: per step the configured per-sample losses are
/// averaged over the batch, decay multiplies the weights by (1 - lr*wd)
/// directly, then the bias-corrected moment step is applied. Batches come from
/// a per-epoch shuffle seeded by derive_seed(cfg.seed, epoch).
///
/// `rewards` must be given (one per row) iff cfg.loss is reward-weighted.
Network train(Network net, const Matrix& inputs, const Labels& golds, std::span<const double> rewards,
              const TrainConfig& cfg, TrainTrace* trace = nullptr);

/// Max over parameters of |g_a - g_n| / max(|g_a|, |g_n|, 1e-8), comparing the
/// analytic loss gradient against central differences in double precision.
/// The weight-decay path is not part of the checked loss.
double grad_check(const Network& net, std::span<const double> x, int gold, double reward, LossKind loss,
                  double eps = 1e-4);

/// argmax per row, ties to the smallest index.
int argmax(std::span<const double> row);
Labels argmax_rows(const Matrix& probs);

std::string to_string(Activation a);
std::string to_string(LossKind k);
std::string to_string(LossSign s);
Activation parse_activation(const std::string& name);
LossSign parse_loss_sign(const std::string& name);

} // namespace kgens
