#include "kgens/classifier.hpp"

#include "kgens/error.hpp"
#include "kgens/random.hpp"
#include "serialize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kgens {

namespace {

constexpr double kProbFloor = 1e-12;
const double kLossCeiling = -std::log(kProbFloor);
const double kLossFloor = -std::log1p(-kProbFloor);

constexpr char kNetMagic[5] = "NETV";

std::vector<std::size_t> layer_dims(const NetworkLayout& layout) {
  std::vector<std::size_t> dims{layout.input_dim};
  dims.insert(dims.end(), layout.hidden.begin(), layout.hidden.end());
  dims.push_back(layout.classes);
  return dims;
}

double activate(Activation a, double z) {
  return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

double activate_derivative(Activation a, double z, double activated) {
  return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - activated * activated;
}

struct Workspace {
  std::vector<std::vector<double>> pre;  // per layer pre-activation
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = output of hidden layer l
  std::vector<double> delta, delta_prev;
  std::vector<double> probs;
};

// One forward pass and, when `grad` is non-null, the backward pass of
// weight * CE(logits, gold), accumulated into grad (not overwritten).
// P is the parameter storage type (float for training, double for checks).
template <class P>
double evaluate(const NetworkLayout& layout, std::span<const P> params, std::span<const double> x, int gold,
                double weight, double* grad, Workspace& ws) {
  const auto dims = layer_dims(layout);
  const std::size_t layers = dims.size() - 1;
  ws.pre.resize(layers);
  ws.act.resize(layers);
  ws.act[0].assign(x.begin(), x.end());

  std::size_t offset = 0;
  std::vector<std::size_t> offsets(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    const std::size_t in = dims[l], out = dims[l + 1];
    const P* w = params.data() + offset;
    const P* b = w + in * out;
    auto& z = ws.pre[l];
    z.assign(out, 0.0);
    const auto& a = ws.act[l];
    for (std::size_t o = 0; o < out; ++o) {
      double sum = static_cast<double>(b[o]);
      const P* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) sum += static_cast<double>(row[i]) * a[i];
      z[o] = sum;
    }
    if (l + 1 < layers) {
      auto& next = ws.act[l + 1];
      next.resize(out);
      for (std::size_t o = 0; o < out; ++o) next[o] = activate(layout.activation, z[o]);
    }
    offset += in * out + out;
  }

  const auto& logits = ws.pre[layers - 1];
  const double top = *std::max_element(logits.begin(), logits.end());
  ws.probs.resize(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    ws.probs[k] = std::exp(logits[k] - top);
    sum += ws.probs[k];
  }
  for (auto& p : ws.probs) p /= sum;
  if (gold < 0) return 0.0;

  const double raw = top + std::log(sum) - logits[static_cast<std::size_t>(gold)];
  const double clamped = std::clamp(raw, kLossFloor, kLossCeiling);
  if (grad == nullptr) return weight * clamped;

  // Outside the clamp the loss is flat, so its gradient vanishes.
  const bool active = raw > kLossFloor && raw < kLossCeiling;
  ws.delta.assign(logits.size(), 0.0);
  if (active)
    for (std::size_t k = 0; k < logits.size(); ++k)
      ws.delta[k] = weight * (ws.probs[k] - (static_cast<int>(k) == gold ? 1.0 : 0.0));

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const P* w = params.data() + offsets[l];
    double* gw = grad + offsets[l];
    double* gb = gw + in * out;
    const auto& a = ws.act[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = ws.delta[o];
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * a[i];
      gb[o] += d;
    }
    if (l == 0) break;
    ws.delta_prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = ws.delta[o];
      const P* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) ws.delta_prev[i] += static_cast<double>(row[i]) * d;
    }
    const auto& z_prev = ws.pre[l - 1];
    for (std::size_t i = 0; i < in; ++i)
      ws.delta_prev[i] *= activate_derivative(layout.activation, z_prev[i], a[i]);
    std::swap(ws.delta, ws.delta_prev);
  }
  return weight * clamped;
}

void check_input(const NetworkLayout& layout, std::span<const double> x) {
  require(x.size() == layout.input_dim, ErrorKind::DimensionMismatch,
          "network expects " + std::to_string(layout.input_dim) + " inputs, got " + std::to_string(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) fail(ErrorKind::NonFinite, "non-finite network input at position " + std::to_string(i));
}

void check_gold(const NetworkLayout& layout, int gold) {
  require(gold >= 0 && static_cast<std::size_t>(gold) < layout.classes, ErrorKind::InvalidLabel,
          "gold label " + std::to_string(gold) + " outside 0.." + std::to_string(layout.classes - 1));
}

std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), static_cast<std::size_t>(m.cols())};
}

} // namespace

void NetworkLayout::validate() const {
  require(input_dim >= 1, ErrorKind::InvalidArgument, "network input_dim must be >= 1");
  require(classes >= 2, ErrorKind::InvalidArgument, "network needs at least 2 classes");
  for (auto w : hidden) require(w >= 1, ErrorKind::InvalidArgument, "hidden layer widths must be >= 1");
}

std::size_t NetworkLayout::parameter_count() const {
  const auto dims = layer_dims(*this);
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) count += dims[l] * dims[l + 1] + dims[l + 1];
  return count;
}

void TrainConfig::validate() const {
  require(batch_size >= 1, ErrorKind::Config, "batch_size must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::Config, "learning_rate must be > 0");
  require(weight_decay >= 0.0 && std::isfinite(weight_decay), ErrorKind::Config, "weight_decay must be >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::Config,
          "moment decay rates must lie in [0,1)");
  require(epsilon > 0.0, ErrorKind::Config, "optimizer epsilon must be > 0");
  for (auto w : hidden) require(w >= 1, ErrorKind::Config, "hidden layer widths must be >= 1");
}

Network Network::init(const NetworkLayout& layout, std::uint64_t seed) {
  layout.validate();
  Network net;
  net.layout_ = layout;
  net.params_.assign(layout.parameter_count(), 0.0f);
  net.first_moment_.assign(net.params_.size(), 0.0);
  net.second_moment_.assign(net.params_.size(), 0.0);

  Rng rng(seed);
  const auto dims = layer_dims(layout);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const bool feeds_rectifier = l + 2 < dims.size() && layout.activation == Activation::relu;
    const double limit = std::sqrt((feeds_rectifier ? 6.0 : 3.0) / static_cast<double>(in));
    for (std::size_t i = 0; i < in * out; ++i) net.params_[offset + i] = static_cast<float>(rng.uniform(-limit, limit));
    offset += in * out + out;
  }
  return net;
}

Vector Network::forward(std::span<const double> x) const {
  check_input(layout_, x);
  Workspace ws;
  evaluate<float>(layout_, params_, x, -1, 1.0, nullptr, ws);
  return Eigen::Map<const Vector>(ws.probs.data(), static_cast<Eigen::Index>(ws.probs.size()));
}

Vector Network::forward(const Vector& x) const {
  return forward(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Matrix Network::predict_proba(const Matrix& inputs) const {
  require(static_cast<std::size_t>(inputs.cols()) == layout_.input_dim, ErrorKind::DimensionMismatch,
          "network expects " + std::to_string(layout_.input_dim) + " inputs, got " + std::to_string(inputs.cols()));
  Matrix out(inputs.rows(), static_cast<Eigen::Index>(layout_.classes));
  Workspace ws;
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    const auto x = row_span(inputs, r);
    check_input(layout_, x);
    evaluate<float>(layout_, params_, x, -1, 1.0, nullptr, ws);
    for (std::size_t k = 0; k < layout_.classes; ++k) out(r, static_cast<Eigen::Index>(k)) = ws.probs[k];
  }
  return out;
}

Labels Network::predict(const Matrix& inputs) const {
  return argmax_rows(predict_proba(inputs));
}

void Network::save(std::ostream& out) const {
  out.write(kNetMagic, 4);
  detail::write_u8(out, kNetVersion);
  detail::write_u8(out, static_cast<std::uint8_t>(layout_.activation));
  detail::write_le(out, 0, 2);
  detail::write_u32(out, static_cast<std::uint32_t>(layout_.input_dim));
  detail::write_u32(out, static_cast<std::uint32_t>(layout_.classes));
  detail::write_u32(out, static_cast<std::uint32_t>(layout_.hidden.size()));
  for (auto w : layout_.hidden) detail::write_u32(out, static_cast<std::uint32_t>(w));
  detail::write_u64(out, step_);
  detail::write_u64(out, params_.size());
  for (float p : params_) detail::write_f32(out, p);
}

Network Network::load(std::istream& in) {
  detail::expect_magic(in, kNetMagic);
  const auto version = detail::read_u8(in);
  require(version == kNetVersion, ErrorKind::UnsupportedVersion, "NETV version " + std::to_string(version));
  const auto act = detail::read_u8(in);
  require(act <= 1, ErrorKind::Parse, "unknown activation code " + std::to_string(act));
  detail::read_le(in, 2);
  NetworkLayout layout;
  layout.activation = static_cast<Activation>(act);
  layout.input_dim = detail::read_u32(in);
  layout.classes = detail::read_u32(in);
  const auto n_hidden = detail::read_u32(in);
  require(n_hidden < 1024, ErrorKind::Parse, "implausible hidden layer count");
  for (std::uint32_t i = 0; i < n_hidden; ++i) layout.hidden.push_back(detail::read_u32(in));
  layout.validate();
  Network net;
  net.layout_ = layout;
  net.step_ = detail::read_u64(in);
  const auto count = detail::read_u64(in);
  require(count == layout.parameter_count(), ErrorKind::Parse, "NETV parameter count does not match layout");
  net.params_.resize(count);
  for (auto& p : net.params_) p = detail::read_f32(in);
  net.first_moment_.assign(count, 0.0);
  net.second_moment_.assign(count, 0.0);
  return net;
}

double loss_ce(std::span<const double> probs, int gold) {
  require(gold >= 0 && static_cast<std::size_t>(gold) < probs.size(), ErrorKind::InvalidLabel,
          "gold label " + std::to_string(gold) + " outside 0.." + std::to_string(probs.size() - 1));
  const double p = std::clamp(probs[static_cast<std::size_t>(gold)], kProbFloor, 1.0 - kProbFloor);
  return -std::log(p);
}

double loss_ce(const Vector& probs, int gold) {
  return loss_ce(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), gold);
}

double loss_reward_weighted(std::span<const double> probs, int gold, double reward) {
  require(std::isfinite(reward), ErrorKind::NonFinite, "reward is not finite");
  return reward * loss_ce(probs, gold);
}

double loss_gradient(const Network& net, std::span<const double> x, int gold, double weight,
                     std::vector<double>& gradient) {
  check_input(net.layout(), x);
  check_gold(net.layout(), gold);
  gradient.assign(net.parameters().size(), 0.0);
  Workspace ws;
  return evaluate<float>(net.layout(), net.parameters(), x, gold, weight, gradient.data(), ws);
}

Network train(Network net, const Matrix& inputs, const Labels& golds, std::span<const double> rewards,
              const TrainConfig& cfg, TrainTrace* trace) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(inputs.rows());
  require(n > 0, ErrorKind::EmptySplit, "training set is empty");
  require(golds.size() == n, ErrorKind::DimensionMismatch,
          std::to_string(n) + " training rows but " + std::to_string(golds.size()) + " labels");
  require(static_cast<std::size_t>(inputs.cols()) == net.layout_.input_dim, ErrorKind::DimensionMismatch,
          "network expects " + std::to_string(net.layout_.input_dim) + " inputs, got " + std::to_string(inputs.cols()));
  require(inputs.allFinite(), ErrorKind::NonFinite, "training inputs contain non-finite values");
  for (int g : golds) check_gold(net.layout_, g);
  const bool weighted = cfg.loss == LossKind::reward_weighted_ce;
  if (weighted) {
    require(rewards.size() == n, ErrorKind::DimensionMismatch, "reward-weighted training needs one reward per row");
    for (double r : rewards) require(std::isfinite(r), ErrorKind::NonFinite, "reward is not finite");
  } else {
    require(rewards.empty(), ErrorKind::InvalidArgument, "rewards given for plain cross-entropy training");
  }
  const double sign = cfg.loss_sign == LossSign::verbatim ? -1.0 : 1.0;

  const std::size_t n_params = net.params_.size();
  std::vector<double> grad(n_params);
  Workspace ws;
  Indices order(n);
  const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const double batch = static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const double weight = weighted ? sign * rewards[i] : 1.0;
        batch_loss += evaluate<float>(net.layout_, net.params_, row_span(inputs, static_cast<Eigen::Index>(i)),
                                      golds[i], weight, grad.data(), ws);
      }
      batch_loss /= batch;
      if (!std::isfinite(batch_loss))
        fail(ErrorKind::NonFiniteLoss, "non-finite loss at step " + std::to_string(net.step_ + 1));
      epoch_loss += batch_loss * batch;

      ++net.step_;
      const double t = static_cast<double>(net.step_);
      const double bias1 = 1.0 - std::pow(cfg.beta1, t);
      const double bias2 = 1.0 - std::pow(cfg.beta2, t);
      for (std::size_t p = 0; p < n_params; ++p) {
        const double g = grad[p] / batch;
        double& m = net.first_moment_[p];
        double& v = net.second_moment_[p];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double step = cfg.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + cfg.epsilon);
        const double updated = static_cast<double>(net.params_[p]) * decay - step;
        net.params_[p] = static_cast<float>(updated);
      }
      for (std::size_t p = 0; p < n_params; ++p)
        if (!std::isfinite(net.params_[p]))
          fail(ErrorKind::NonFiniteLoss, "parameter diverged at step " + std::to_string(net.step_));
    }
    if (trace) trace->epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  if (trace) trace->steps = net.step_;
  return net;
}

double grad_check(const Network& net, std::span<const double> x, int gold, double reward, LossKind loss, double eps) {
  require(eps > 0.0, ErrorKind::InvalidArgument, "finite-difference step must be positive");
  check_input(net.layout(), x);
  check_gold(net.layout(), gold);
  const double weight = loss == LossKind::reward_weighted_ce ? reward : 1.0;

  std::vector<double> params(net.parameters().begin(), net.parameters().end());
  std::vector<double> analytic(params.size(), 0.0);
  Workspace ws;
  evaluate<double>(net.layout(), params, x, gold, weight, analytic.data(), ws);

  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + eps;
    const double up = evaluate<double>(net.layout(), params, x, gold, weight, nullptr, ws);
    params[p] = saved - eps;
    const double down = evaluate<double>(net.layout(), params, x, gold, weight, nullptr, ws);
    params[p] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
  }
  return worst;
}

int argmax(std::span<const double> row) {
  require(!row.empty(), ErrorKind::InvalidArgument, "argmax of an empty row");
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return static_cast<int>(best);
}

Labels argmax_rows(const Matrix& probs) {
  Labels out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index r = 0; r < probs.rows(); ++r) out[static_cast<std::size_t>(r)] = argmax(row_span(probs, r));
  return out;
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }
std::string to_string(LossKind k) { return k == LossKind::plain_ce ? "plain-ce" : "reward-weighted-ce"; }
std::string to_string(LossSign s) { return s == LossSign::fixed ? "fixed" : "verbatim"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  fail(ErrorKind::Config, "unknown activation '" + name + "'");
}

LossSign parse_loss_sign(const std::string& name) {
  if (name == "fixed") return LossSign::fixed;
  if (name == "verbatim") return LossSign::verbatim;
  fail(ErrorKind::Config, "unknown loss sign '" + name + "'");
}

} // namespace kgens
