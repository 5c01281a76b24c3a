// kgens: run, ablate, kappa, synth, inspect.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error. Errors are written to
// stderr as {"error": {"kind": ..., "message": ...}}.

#include "kgens/error.hpp"
#include "kgens/report.hpp"
#include "kgens/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <unordered_map>

namespace {

using json = nlohmann::ordered_json;
using namespace kgens;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int report_error(std::string_view kind, const std::string& message, int code) {
  const json err = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Flags shared by run and ablate.
struct ExperimentFlags {
  std::vector<std::string> methods, embeddings, kg, alpha_grid, beta_grid;
  std::vector<double> fractions;
  std::string labels, out, format = "json", reward_norm = "shifted", loss_sign = "fixed";
  std::uint64_t seed = 42;
  std::size_t epochs = 0, batch_size = 0, pca_dim = 100, jobs = 1;
  double lr = 0.0, weight_decay = -1.0;
  bool as_json = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  const TrainConfig defaults;
  cmd->add_option("--embeddings", f.embeddings, "Model-source EMB files, comma separated; order defines fusion order")
      ->delimiter(',')
      ->required();
  cmd->add_option("--labels", f.labels, "Label manifest TSV (id<TAB>label)")->required();
  cmd->add_option("--kg", f.kg, "Knowledge sources as cnet.emb,wiki.emb")->delimiter(',');
  cmd->add_option("--fractions", f.fractions, "Test fractions, comma separated")
      ->delimiter(',')
      ->default_str("0.10,0.15,0.20,0.25,0.30");
  cmd->add_option("--seed", f.seed, "Global seed")->default_val(42);
  cmd->add_option("--reward-norm", f.reward_norm, "Reward normalization")
      ->check(CLI::IsMember({"shifted", "raw"}))
      ->default_val("shifted");
  cmd->add_option("--loss-sign", f.loss_sign, "Reward-weighted loss sign")
      ->check(CLI::IsMember({"fixed", "verbatim"}))
      ->default_val("fixed");
  cmd->add_option("--epochs", f.epochs, "Training epochs")->default_str(std::to_string(defaults.epochs));
  cmd->add_option("--batch-size", f.batch_size, "Mini-batch size")->default_str(std::to_string(defaults.batch_size));
  cmd->add_option("--lr", f.lr, "AdamW learning rate")->default_str("2e-05");
  cmd->add_option("--weight-decay", f.weight_decay, "AdamW decoupled weight decay")->default_str("1e-06");
  cmd->add_option("--pca-dim", f.pca_dim, "PCA target dimension")->default_val(100);
  cmd->add_option("--out", f.out, "Report path (stdout when omitted)");
  cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->default_val("json");
  cmd->add_option("--jobs", f.jobs, "Worker threads (1 = reference mode)")->default_val(1)->check(CLI::PositiveNumber);
  cmd->add_flag("--json", f.as_json, "Machine-readable stdout");
}

// A single value is a lattice step ("0.1" -> 0, 0.1, ..., 1); several values
// are an explicit grid.
std::vector<double> grid_values(const std::vector<std::string>& items, const std::string& flag) {
  std::vector<double> values;
  for (const auto& s : items) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + s + "' is not a number");
    }
  }
  if (values.size() == 1) {
    try {
      return unit_grid(values[0]);
    } catch (const Error& e) {
      throw UsageError(flag + ": " + e.what());
    }
  }
  return values;
}

double grid_step(const std::vector<std::string>& items, const std::string& flag, double fallback) {
  if (items.empty()) return fallback;
  if (items.size() != 1) throw UsageError(flag + " takes a single step value in run");
  const auto grid = grid_values(items, flag);
  return grid[1] - grid[0];
}

ExperimentConfig build_config(const ExperimentFlags& f) {
  ExperimentConfig c;
  c.embedding_paths = f.embeddings;
  c.kg_paths = f.kg;
  c.labels_path = f.labels;
  c.methods = f.methods;
  if (!f.fractions.empty()) c.fractions = f.fractions;
  for (double v : c.fractions)
    if (!(v > 0.0 && v < 1.0)) throw UsageError("--fractions: values must lie in (0,1)");
  c.seed = f.seed;
  if (f.epochs) c.train.epochs = f.epochs;
  if (f.batch_size) c.train.batch_size = f.batch_size;
  if (f.lr > 0.0) c.train.learning_rate = f.lr;
  if (f.weight_decay >= 0.0) c.train.weight_decay = f.weight_decay;
  c.train.loss_sign = parse_loss_sign(f.loss_sign);
  c.reward_norm = parse_reward_norm(f.reward_norm);
  c.pca_dim = f.pca_dim;
  c.jobs = f.jobs;
  if (!f.kg.empty() && f.kg.size() != 2) throw UsageError("--kg expects exactly two files: cnet.emb,wiki.emb");
  if (f.as_json && f.out.empty() && f.format == "csv")
    throw UsageError("--json without --out needs --format json");
  return c;
}

template <class Report> void write_report(const Report& report, const ExperimentFlags& f) {
  const auto format = parse_report_format(f.format);
  if (f.out.empty()) {
    std::cout << (format == ReportFormat::json ? to_json(report) : to_csv(report));
    return;
  }
  emit(report, format, f.out);
}

int cmd_run(const ExperimentFlags& f) {
  ExperimentConfig c = build_config(f);
  if (c.methods.empty()) throw UsageError("--method is required");
  for (const auto& m : c.methods) {
    if (m == "de" && c.kg_paths.empty()) throw UsageError("method de requires --kg cnet.emb,wiki.emb");
    if (m == "she" && c.embedding_paths.size() < 2) throw UsageError("method she requires at least two --embeddings");
  }
  c.alpha_step = grid_step(f.alpha_grid, "--alpha-grid", c.alpha_step);
  c.beta_step = grid_step(f.beta_grid, "--beta-grid", c.beta_step);

  const auto report = run(c);
  write_report(report, f);
  if (f.out.empty()) return 0;
  if (f.as_json) {
    json means = json::array();
    for (const auto& m : report.means) means.push_back({{"method", m.method}, {"accuracy", m.accuracy}, {"kappa", m.kappa}});
    std::cout << json{{"out", f.out}, {"means", means}}.dump() << "\n";
  } else {
    std::cout << "method                 mean_acc   mean_kappa\n";
    for (const auto& m : report.means) {
      std::string name = m.method;
      name.resize(std::max<std::size_t>(name.size(), 22), ' ');
      std::cout << name << " " << fmt(m.accuracy) << "     " << fmt(m.kappa) << "\n";
    }
    std::cout << "report written to " << f.out << "\n";
  }
  return 0;
}

int cmd_ablate(const ExperimentFlags& f) {
  ExperimentConfig c = build_config(f);
  if (f.alpha_grid.empty() == f.beta_grid.empty())
    throw UsageError("ablate needs exactly one of --alpha-grid or --beta-grid");
  const bool alpha = !f.alpha_grid.empty();
  if (!alpha && c.kg_paths.empty()) throw UsageError("beta ablation requires --kg cnet.emb,wiki.emb");
  if (alpha && c.embedding_paths.size() != 2) throw UsageError("alpha ablation requires exactly two --embeddings");
  const auto grid = alpha ? grid_values(f.alpha_grid, "--alpha-grid") : grid_values(f.beta_grid, "--beta-grid");
  for (double v : grid)
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("grid values must lie in [0,1]");

  const auto report = ablate(c, alpha ? AblationParam::alpha : AblationParam::beta, grid);
  write_report(report, f);
  if (f.out.empty()) return 0;
  if (f.as_json) {
    json points = json::array();
    for (const auto& p : report.points) points.push_back({{"value", p.value}, {"accuracy", p.accuracy}, {"kappa", p.kappa}});
    std::cout << json{{"out", f.out}, {"param", to_string(report.param)}, {"points", points}}.dump() << "\n";
  } else {
    std::cout << to_string(report.param) << "     accuracy   kappa\n";
    for (const auto& p : report.points)
      std::cout << fmt(p.value, 3) << "     " << fmt(p.accuracy) << "     " << fmt(p.kappa) << "\n";
    std::cout << "report written to " << f.out << "\n";
  }
  return 0;
}

int cmd_kappa(const std::string& gold_path, const std::string& pred_path, bool as_json) {
  const LabelTable gold = load_labels(gold_path);
  const LabelTable pred = load_labels(pred_path);
  std::unordered_map<std::string, int> by_id;
  for (std::size_t i = 0; i < pred.size(); ++i) by_id.emplace(pred.ids[i], pred.labels[i]);
  Labels aligned;
  for (const auto& id : gold.ids) {
    const auto it = by_id.find(id);
    require(it != by_id.end(), ErrorKind::MissingSample, "id '" + id + "' missing from " + pred_path);
    aligned.push_back(it->second);
  }
  require(pred.size() == gold.size(), ErrorKind::ExtraSample, pred_path + " has ids absent from " + gold_path);
  const int classes = std::max(gold.num_classes, pred.num_classes);
  const auto terms = kappa_terms(aligned, gold.labels, classes);
  if (as_json) {
    std::cout << json{{"n", gold.size()}, {"classes", classes}, {"accuracy", terms.observed}, {"kappa", terms.kappa},
                      {"p_o", terms.observed}, {"p_e", terms.expected}}
                     .dump()
              << "\n";
  } else {
    std::cout << "n         " << gold.size() << "\naccuracy  " << fmt(terms.observed, 6) << "\nkappa     "
              << fmt(terms.kappa, 6) << "\np_e       " << fmt(terms.expected, 6) << "\n";
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
              bool as_json) {
  const SyntheticSpec spec = parse_synthetic_spec(read_text(spec_path));
  const auto data = gen_synthetic_detailed(spec, seed.value_or(spec.seed));
  std::filesystem::create_directories(out_dir);
  json files = json::array();
  for (const auto& src : data.dataset.sources) {
    const auto path = std::filesystem::path(out_dir) / (src.source_id + ".emb");
    write_embeddings(path, src);
    files.push_back({{"path", path.string()}, {"n", src.size()}, {"dim", src.dim()}});
  }
  const auto labels_path = std::filesystem::path(out_dir) / "labels.tsv";
  write_labels(labels_path, data.dataset.labels);
  if (as_json) {
    std::cout << json{{"embeddings", files}, {"labels", labels_path.string()}}.dump() << "\n";
  } else {
    for (const auto& f : files)
      std::cout << f["path"].get<std::string>() << "  " << f["n"] << "x" << f["dim"] << "\n";
    std::cout << labels_path.string() << "  " << data.dataset.size() << " labels\n";
  }
  return 0;
}

int cmd_inspect(const std::string& path, bool stats, bool as_json) {
  const std::string text = read_text(path);
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
  MatrixF v;
  try {
    v = decode_embeddings(bytes, !stats);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
  json out = {{"path", path}, {"version", kEmbVersion}, {"dtype", "f32"}, {"n", v.rows()}, {"dim", v.cols()}};
  if (stats) {
    std::size_t finite = 0;
    json columns = json::array();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      double sum = 0.0, sq = 0.0;
      std::size_t count = 0;
      for (Eigen::Index r = 0; r < v.rows(); ++r) {
        const double x = v(r, c);
        if (!std::isfinite(x)) continue;
        ++count;
        sum += x;
        sq += x * x;
      }
      finite += count;
      const double mean = count ? sum / static_cast<double>(count) : 0.0;
      const double var = count ? std::max(0.0, sq / static_cast<double>(count) - mean * mean) : 0.0;
      columns.push_back({{"mean", mean}, {"std", std::sqrt(var)}});
    }
    const auto total = static_cast<std::size_t>(v.size());
    out["finite_count"] = finite;
    out["non_finite_count"] = total - finite;
    out["all_finite"] = finite == total;
    out["columns"] = columns;
  }
  if (as_json) {
    std::cout << out.dump() << "\n";
    return 0;
  }
  std::cout << path << "\n  version " << int(kEmbVersion) << "  dtype f32  n " << v.rows() << "  dim " << v.cols() << "\n";
  if (stats) {
    std::cout << "  finite " << out["finite_count"] << " / " << v.size() << "\n  col        mean         std\n";
    for (std::size_t c = 0; c < out["columns"].size(); ++c)
      std::cout << "  " << c << "  " << fmt(out["columns"][c]["mean"].get<double>(), 6) << "  "
                << fmt(out["columns"][c]["std"].get<double>(), 6) << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train and evaluate embedding ensembles over precomputed sentence embeddings"};
  app.require_subcommand(1);

  ExperimentFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Evaluate methods over the split fractions and write a report");
  add_experiment_flags(run_cmd, run_flags);
  run_cmd->add_option("--method", run_flags.methods, "baseline, baseline:<source>, she, se, de (comma separated)")
      ->delimiter(',')
      ->required();
  run_cmd->add_option("--alpha-grid", run_flags.alpha_grid, "ShE lattice step")->default_str("0.1");
  run_cmd->add_option("--beta-grid", run_flags.beta_grid, "DE beta grid step")->default_str("0.1");

  ExperimentFlags ablate_flags;
  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep alpha or beta and report test accuracy per value");
  add_experiment_flags(ablate_cmd, ablate_flags);
  ablate_cmd->add_option("--method", ablate_flags.methods, "Accepted for symmetry with run; ignored")->delimiter(',');
  ablate_cmd->add_option("--alpha-grid", ablate_flags.alpha_grid, "Step (one value) or explicit values")->delimiter(',');
  ablate_cmd->add_option("--beta-grid", ablate_flags.beta_grid, "Step (one value) or explicit values")->delimiter(',');

  std::string gold_path, pred_path;
  bool kappa_json = false;
  auto* kappa_cmd = app.add_subcommand("kappa", "Accuracy and Cohen's kappa between two label TSVs");
  kappa_cmd->add_option("gold", gold_path, "Reference labels TSV")->required();
  kappa_cmd->add_option("pred", pred_path, "Predicted labels TSV")->required();
  kappa_cmd->add_flag("--json", kappa_json, "Machine-readable stdout");

  std::string spec_path, synth_out;
  std::optional<std::uint64_t> synth_seed;
  bool synth_json = false;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset from a spec JSON");
  synth_cmd->add_option("spec", spec_path, "SyntheticSpec JSON")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "Override the spec seed");
  synth_cmd->add_flag("--json", synth_json, "Machine-readable stdout");

  std::string emb_path;
  bool inspect_stats = false, inspect_json = false;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print an EMB file's header and optional column statistics");
  inspect_cmd->add_option("file", emb_path, "EMB file")->required();
  inspect_cmd->add_flag("--stats", inspect_stats, "Per-column mean/std and finite-value count");
  inspect_cmd->add_flag("--json", inspect_json, "Machine-readable stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("Usage", e.what(), 2);
  }

  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*ablate_cmd) return cmd_ablate(ablate_flags);
    if (*kappa_cmd) return cmd_kappa(gold_path, pred_path, kappa_json);
    if (*synth_cmd) return cmd_synth(spec_path, synth_out, synth_seed, synth_json);
    if (*inspect_cmd) return cmd_inspect(emb_path, inspect_stats, inspect_json);
  } catch (const UsageError& e) {
    return report_error("Usage", e.what(), 2);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("Internal", e.what(), 1);
  }
  return 2;
}
