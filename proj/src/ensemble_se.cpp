#include "kgens/ensemble_se.hpp"

#include "kgens/error.hpp"
#include "serialize.hpp"

namespace kgens {

namespace {

constexpr char kEnsembleMagic[5] = "ENSV";

} // namespace

std::string to_string(Strategy s) {
  switch (s) {
  case Strategy::baseline: return "baseline";
  case Strategy::shallow: return "she";
  case Strategy::semi: return "se";
  case Strategy::deep: return "de";
  }
  return "se";
}

std::string to_string(RewardNorm n) { return n == RewardNorm::shifted ? "shifted" : "raw"; }

RewardNorm parse_reward_norm(const std::string& name) {
  if (name == "shifted") return RewardNorm::shifted;
  if (name == "raw") return RewardNorm::raw;
  fail(ErrorKind::Config, "unknown reward normalisation '" + name + "'");
}

void TrainedEnsemble::save(std::ostream& out) const {
  out.write(kEnsembleMagic, 4);
  detail::write_u8(out, kEnsembleVersion);
  detail::write_u8(out, static_cast<std::uint8_t>(strategy));
  detail::write_u8(out, static_cast<std::uint8_t>(reward_norm));
  detail::write_u8(out, beta.has_value() ? 1 : 0);
  detail::write_f64(out, beta.value_or(0.0));
  detail::write_u32(out, static_cast<std::uint32_t>(source_order.size()));
  for (const auto& s : source_order) detail::write_string(out, s);
  save_pca(out, pca);
  network.save(out);
}

TrainedEnsemble TrainedEnsemble::load(std::istream& in) {
  detail::expect_magic(in, kEnsembleMagic);
  const auto version = detail::read_u8(in);
  require(version == kEnsembleVersion, ErrorKind::UnsupportedVersion, "ENSV version " + std::to_string(version));
  TrainedEnsemble model;
  const auto strategy = detail::read_u8(in);
  const auto norm = detail::read_u8(in);
  require(strategy <= 3 && norm <= 1, ErrorKind::Parse, "ENSV header has unknown codes");
  model.strategy = static_cast<Strategy>(strategy);
  model.reward_norm = static_cast<RewardNorm>(norm);
  const bool has_beta = detail::read_u8(in) != 0;
  const double beta = detail::read_f64(in);
  if (has_beta) model.beta = beta;
  const auto n_sources = detail::read_u32(in);
  require(n_sources < 4096, ErrorKind::Parse, "implausible source count");
  for (std::uint32_t i = 0; i < n_sources; ++i) model.source_order.push_back(detail::read_string(in));
  model.pca = load_pca(in);
  model.network = Network::load(in);
  require(model.network.layout().input_dim == model.pca.output_dim(), ErrorKind::Parse,
          "ENSV network input does not match PCA output");
  return model;
}

Matrix concat_sources(const LabeledDataset& dataset, std::span<const std::string> sources,
                      std::span<const std::size_t> rows) {
  require(!sources.empty(), ErrorKind::InvalidArgument, "fusion needs at least one source");
  std::vector<Matrix> blocks;
  for (const auto& id : sources) blocks.push_back(gather_rows(dataset.source(id).vectors, rows));
  return concat_columns(blocks);
}

FusedSplit fuse(const LabeledDataset& dataset, std::span<const std::string> sources, const SplitPlan& split,
                std::size_t target_dim) {
  for (const auto& id : sources) (void)dataset.source(id);
  require(!split.train.empty(), ErrorKind::EmptySplit, "fusion needs training rows");
  FusedSplit out;
  out.train.source_order.assign(sources.begin(), sources.end());
  const Matrix train_raw = concat_sources(dataset, sources, split.train);
  out.train.pca = pca_fit(train_raw, target_dim);
  out.train.fused = pca_transform(out.train.pca, train_raw);
  if (!split.test.empty()) out.test = pca_transform(out.train.pca, concat_sources(dataset, sources, split.test));
  else out.test.resize(0, static_cast<Eigen::Index>(out.train.pca.output_dim()));
  return out;
}

NetworkLayout layout_for(std::size_t input_dim, int classes, const TrainConfig& cfg) {
  NetworkLayout layout;
  layout.input_dim = input_dim;
  layout.hidden = cfg.hidden;
  layout.classes = static_cast<std::size_t>(classes);
  layout.activation = cfg.activation;
  return layout;
}

TrainedEnsemble train_se(const FusedDataset& data, const Labels& golds, int classes, const TrainConfig& cfg) {
  TrainConfig plain = cfg;
  plain.loss = LossKind::plain_ce;
  TrainedEnsemble model;
  model.strategy = Strategy::semi;
  model.source_order = data.source_order;
  model.pca = data.pca;
  model.network = train(Network::init(layout_for(static_cast<std::size_t>(data.fused.cols()), classes, plain), plain.seed),
                        data.fused, golds, {}, plain);
  return model;
}

Prediction predict_fused(const TrainedEnsemble& model, const Matrix& fused) {
  require(fused.rows() > 0, ErrorKind::EmptySplit, "nothing to predict: split is empty");
  Prediction out;
  out.probs = model.network.predict_proba(fused);
  out.labels = argmax_rows(out.probs);
  return out;
}

Prediction predict_ensemble(const TrainedEnsemble& model, const LabeledDataset& dataset,
                            std::span<const std::size_t> rows) {
  require(!rows.empty(), ErrorKind::EmptySplit, "nothing to predict: split is empty");
  const Matrix raw = concat_sources(dataset, model.source_order, rows);
  require(static_cast<std::size_t>(raw.cols()) == model.pca.input_dim(), ErrorKind::DimensionMismatch,
          "sources give " + std::to_string(raw.cols()) + " fused dims, model expects " +
              std::to_string(model.pca.input_dim()));
  return predict_fused(model, pca_transform(model.pca, raw));
}

Prediction predict_se(const TrainedEnsemble& model, const LabeledDataset& dataset, const SplitPlan& split) {
  return predict_ensemble(model, dataset, split.test);
}

} // namespace kgens
