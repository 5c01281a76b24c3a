#include "kgens/runner.hpp"

#include "kgens/error.hpp"
#include "kgens/random.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <set>

namespace kgens {

namespace {

struct BaselineOutput {
  ProbabilityTable train;
  ProbabilityTable test;
};

TrainConfig cell_config(const ExperimentConfig& config, const std::string& method, double fraction) {
  TrainConfig cfg = config.train;
  cfg.seed = cell_seed(config.seed, method, fraction);
  return cfg;
}

BaselineOutput fit_baseline(const ExperimentConfig& config, const ExperimentInputs& inputs, const std::string& source,
                            const SplitPlan& plan) {
  const auto& data = inputs.dataset;
  const auto& set = data.source(source);
  const Matrix train_raw = gather_rows(set.vectors, plan.train);
  const PcaModel pca = pca_fit(train_raw, config.pca_dim);
  const Matrix train_x = pca_transform(pca, train_raw);
  const Matrix test_x = pca_transform(pca, gather_rows(set.vectors, plan.test));

  TrainConfig cfg = cell_config(config, "baseline:" + source, plan.test_fraction);
  cfg.loss = LossKind::plain_ce;
  const auto layout = layout_for(pca.output_dim(), data.num_classes(), cfg);
  const Network net = train(Network::init(layout, cfg.seed), train_x, gather_labels(data.labels.labels, plan.train), {}, cfg);
  return {{source, net.predict_proba(train_x)}, {source, net.predict_proba(test_x)}};
}

void score(CellResult& cell, const Labels& pred, const Labels& gold, int classes) {
  cell.n_test = gold.size();
  cell.accuracy = accuracy(pred, gold);
  cell.confusion = confusion(pred, gold, classes);
  cell.kappa = kappa_terms(pred, gold, classes);
}

CellResult run_cell(const ExperimentConfig& config, const ExperimentInputs& inputs, const std::string& method,
                    const SplitPlan& plan) {
  const auto& data = inputs.dataset;
  const int classes = data.num_classes();
  const Labels train_gold = gather_labels(data.labels.labels, plan.train);
  const Labels test_gold = gather_labels(data.labels.labels, plan.test);

  CellResult cell;
  cell.method = method;
  cell.fraction = plan.test_fraction;
  cell.n_train = plan.train.size();

  if (method.starts_with("baseline:")) {
    const auto out = fit_baseline(config, inputs, method.substr(9), plan);
    score(cell, argmax_rows(out.test.probs), test_gold, classes);
  } else if (method == "she") {
    std::vector<ProbabilityTable> train_tables, test_tables;
    for (const auto& src : inputs.model_sources) {
      auto out = fit_baseline(config, inputs, src, plan);
      train_tables.push_back(std::move(out.train));
      test_tables.push_back(std::move(out.test));
    }
    const auto fit = fit_alpha(train_tables, train_gold, config.alpha_step);
    cell.alpha = fit.weights.alpha;
    cell.alpha_train_loss = fit.loss;
    score(cell, predict(test_tables, fit.weights), test_gold, classes);
  } else if (method == "se") {
    const auto fused = fuse(data, inputs.model_sources, plan, config.pca_dim);
    const auto model = train_se(fused.train, train_gold, classes, cell_config(config, method, plan.test_fraction));
    score(cell, predict_fused(model, fused.test).labels, test_gold, classes);
  } else if (method == "de") {
    const auto fused = fuse(data, inputs.model_sources, plan, config.pca_dim);
    const auto kg = reduce_knowledge(data, *inputs.cnet_id, *inputs.wiki_id, plan, fused.train.pca.output_dim());
    const auto fit = fit_beta(fused.train, train_gold, classes, kg.train, config.beta_step, config.reward_norm,
                              cell_config(config, method, plan.test_fraction));
    cell.beta = fit.beta;
    cell.beta_validation = fit.candidates;
    score(cell, predict_fused(fit.model, fused.test).labels, test_gold, classes);
  } else {
    fail(ErrorKind::Config, "unknown method '" + method + "'");
  }
  return cell;
}

DatasetSummary summarize(const LabeledDataset& data) {
  DatasetSummary s;
  s.samples = data.size();
  s.classes = data.num_classes();
  for (const auto& src : data.sources) s.source_dims.emplace_back(src.source_id, src.dim());
  return s;
}

void validate_config(const ExperimentConfig& config) {
  config.train.validate();
  require(!config.fractions.empty(), ErrorKind::Config, "no split fractions configured");
  require(config.pca_dim >= 1, ErrorKind::Config, "pca_dim must be >= 1");
  require(config.jobs >= 1, ErrorKind::Config, "jobs must be >= 1");
}

[[noreturn]] void rethrow_annotated(const Error& e, const std::string& method, double fraction) {
  throw Error(e.kind(), "[" + method + " @ " + fraction_tag(fraction) + "] " + e.what());
}

} // namespace

std::string to_string(AblationParam p) { return p == AblationParam::alpha ? "alpha" : "beta"; }

std::uint64_t cell_seed(std::uint64_t seed, const std::string& method, double fraction) {
  return derive_seed(seed, method + "|" + fraction_tag(fraction));
}

ExperimentInputs load_inputs(const ExperimentConfig& config) {
  require(!config.labels_path.empty(), ErrorKind::Config, "no labels file given");
  require(!config.embedding_paths.empty(), ErrorKind::Config, "no embedding files given");
  require(config.kg_paths.empty() || config.kg_paths.size() == 2, ErrorKind::Config,
          "knowledge sources must be given as exactly two files (cnet, wiki)");
  const LabelTable labels = load_labels(config.labels_path);
  ExperimentInputs inputs;
  std::vector<EmbeddingSet> sets;
  for (const auto& path : config.embedding_paths) {
    sets.push_back(load_embeddings(path));
    inputs.model_sources.push_back(sets.back().source_id);
  }
  if (!config.kg_paths.empty()) {
    sets.push_back(load_embeddings(config.kg_paths[0]));
    inputs.cnet_id = sets.back().source_id;
    sets.push_back(load_embeddings(config.kg_paths[1]));
    inputs.wiki_id = sets.back().source_id;
  }
  inputs.dataset = align(std::move(sets), labels);
  return inputs;
}

std::vector<std::string> expand_methods(const ExperimentConfig& config, const ExperimentInputs& inputs) {
  require(!config.methods.empty(), ErrorKind::Config, "no methods configured");
  require(!inputs.model_sources.empty(), ErrorKind::Config, "no model sources");
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& m) {
    require(seen.insert(m).second, ErrorKind::Config, "method '" + m + "' listed twice");
    out.push_back(m);
  };
  for (const auto& m : config.methods) {
    if (m == "baseline") {
      for (const auto& src : inputs.model_sources) add("baseline:" + src);
    } else if (m.starts_with("baseline:")) {
      const auto src = m.substr(9);
      require(inputs.dataset.has_source(src), ErrorKind::UnknownSource, "baseline source '" + src + "' not loaded");
      add(m);
    } else if (m == "she") {
      require(inputs.model_sources.size() >= 2, ErrorKind::Config, "she needs at least two model sources");
      add(m);
    } else if (m == "se") {
      add(m);
    } else if (m == "de") {
      require(inputs.cnet_id && inputs.wiki_id, ErrorKind::Config, "de needs both knowledge sources (cnet, wiki)");
      add(m);
    } else {
      fail(ErrorKind::Config, "unknown method '" + m + "'");
    }
  }
  return out;
}

EvaluationReport run(const ExperimentConfig& config, const ExperimentInputs& inputs) {
  validate_config(config);
  EvaluationReport report;
  report.config = config;
  report.dataset = summarize(inputs.dataset);
  report.methods = expand_methods(config, inputs);
  const auto plans = make_splits(inputs.dataset.size(), config.fractions, config.seed);

  const std::size_t n_fractions = plans.size();
  report.rows.resize(report.methods.size() * n_fractions);
  detail::parallel_for(report.rows.size(), config.jobs, [&](std::size_t cell) {
    const auto& method = report.methods[cell / n_fractions];
    const auto& plan = plans[cell % n_fractions];
    try {
      report.rows[cell] = run_cell(config, inputs, method, plan);
    } catch (const Error& e) {
      rethrow_annotated(e, method, plan.test_fraction);
    }
  });

  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    MethodMean mean;
    mean.method = report.methods[m];
    for (std::size_t f = 0; f < n_fractions; ++f) {
      mean.accuracy += report.rows[m * n_fractions + f].accuracy;
      mean.kappa += report.rows[m * n_fractions + f].kappa.kappa;
    }
    mean.accuracy /= static_cast<double>(n_fractions);
    mean.kappa /= static_cast<double>(n_fractions);
    report.means.push_back(mean);
  }
  return report;
}

EvaluationReport run(const ExperimentConfig& config) {
  return run(config, load_inputs(config));
}

AblationReport ablate(const ExperimentConfig& config, const ExperimentInputs& inputs, AblationParam param,
                      std::vector<double> grid) {
  validate_config(config);
  require(!grid.empty(), ErrorKind::Config, "ablation grid is empty");
  std::sort(grid.begin(), grid.end());
  for (double v : grid)
    require(v >= 0.0 && v <= 1.0, ErrorKind::Config, "ablation grid value " + fraction_tag(v) + " outside [0,1]");

  const auto& data = inputs.dataset;
  const int classes = data.num_classes();
  if (param == AblationParam::alpha)
    require(inputs.model_sources.size() == 2, ErrorKind::Config, "alpha ablation needs exactly two model sources");
  else
    require(inputs.cnet_id && inputs.wiki_id, ErrorKind::Config, "beta ablation needs both knowledge sources");

  const auto plans = make_splits(data.size(), config.fractions, config.seed);
  const std::size_t n_fractions = plans.size();
  // acc/kappa indexed [fraction][grid point]
  std::vector<std::vector<double>> acc(n_fractions, std::vector<double>(grid.size()));
  std::vector<std::vector<double>> kap(n_fractions, std::vector<double>(grid.size()));

  if (param == AblationParam::alpha) {
    detail::parallel_for(n_fractions, config.jobs, [&](std::size_t f) {
      const auto& plan = plans[f];
      try {
        std::vector<ProbabilityTable> tables;
        for (const auto& src : inputs.model_sources) tables.push_back(fit_baseline(config, inputs, src, plan).test);
        const Labels gold = gather_labels(data.labels.labels, plan.test);
        for (std::size_t g = 0; g < grid.size(); ++g) {
          const Labels pred = predict(tables, SimplexWeights::pair(grid[g]));
          acc[f][g] = accuracy(pred, gold);
          kap[f][g] = cohen_kappa(pred, gold, classes);
        }
      } catch (const Error& e) {
        rethrow_annotated(e, "ablate:alpha", plan.test_fraction);
      }
    });
  } else {
    std::vector<FusedSplit> fused(n_fractions);
    std::vector<KnowledgeSplit> knowledge(n_fractions);
    detail::parallel_for(n_fractions, config.jobs, [&](std::size_t f) {
      fused[f] = fuse(data, inputs.model_sources, plans[f], config.pca_dim);
      knowledge[f] =
          reduce_knowledge(data, *inputs.cnet_id, *inputs.wiki_id, plans[f], fused[f].train.pca.output_dim());
    });
    detail::parallel_for(n_fractions * grid.size(), config.jobs, [&](std::size_t job) {
      const std::size_t f = job / grid.size(), g = job % grid.size();
      const auto& plan = plans[f];
      try {
        const Labels train_gold = gather_labels(data.labels.labels, plan.train);
        const Labels gold = gather_labels(data.labels.labels, plan.test);
        const auto model = train_de(fused[f].train, train_gold, classes, knowledge[f].train, grid[g],
                                    config.reward_norm, cell_config(config, "de", plan.test_fraction));
        const Labels pred = predict_fused(model, fused[f].test).labels;
        acc[f][g] = accuracy(pred, gold);
        kap[f][g] = cohen_kappa(pred, gold, classes);
      } catch (const Error& e) {
        rethrow_annotated(e, "ablate:beta", plan.test_fraction);
      }
    });
  }

  AblationReport report;
  report.config = config;
  report.dataset = summarize(data);
  report.param = param;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    AblationPoint point;
    point.value = grid[g];
    for (std::size_t f = 0; f < n_fractions; ++f) {
      point.fraction_accuracy.push_back(acc[f][g]);
      point.fraction_kappa.push_back(kap[f][g]);
      point.accuracy += acc[f][g];
      point.kappa += kap[f][g];
    }
    point.accuracy /= static_cast<double>(n_fractions);
    point.kappa /= static_cast<double>(n_fractions);
    report.points.push_back(std::move(point));
  }
  return report;
}

AblationReport ablate(const ExperimentConfig& config, AblationParam param, std::vector<double> grid) {
  return ablate(config, load_inputs(config), param, std::move(grid));
}

} // namespace kgens
