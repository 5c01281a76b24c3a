#include "kgens/report.hpp"

#include "kgens/error.hpp"
#include "kgens/random.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace kgens {

namespace {

using json = nlohmann::ordered_json;

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == to_string(LossKind::plain_ce)) return LossKind::plain_ce;
  if (name == to_string(LossKind::reward_weighted_ce)) return LossKind::reward_weighted_ce;
  fail(ErrorKind::Parse, "unknown loss kind '" + name + "'");
}

AblationParam parse_param(const std::string& name) {
  if (name == "alpha") return AblationParam::alpha;
  if (name == "beta") return AblationParam::beta;
  fail(ErrorKind::Parse, "unknown ablation parameter '" + name + "'");
}

json train_json(const TrainConfig& t) {
  return {{"batch_size", t.batch_size},   {"learning_rate", t.learning_rate},
          {"weight_decay", t.weight_decay}, {"epochs", t.epochs},
          {"loss", to_string(t.loss)},    {"loss_sign", to_string(t.loss_sign)},
          {"hidden", t.hidden},           {"activation", to_string(t.activation)},
          {"beta1", t.beta1},             {"beta2", t.beta2},
          {"epsilon", t.epsilon}};
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.batch_size = j.at("batch_size").get<std::size_t>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.epochs = j.at("epochs").get<std::size_t>();
  t.loss = parse_loss_kind(j.at("loss").get<std::string>());
  t.loss_sign = parse_loss_sign(j.at("loss_sign").get<std::string>());
  t.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  t.activation = parse_activation(j.at("activation").get<std::string>());
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.epsilon = j.at("epsilon").get<double>();
  return t;
}

// jobs is deliberately absent: it never changes a number.
json config_json(const ExperimentConfig& c) {
  return {{"embeddings", c.embedding_paths}, {"kg", c.kg_paths},
          {"labels", c.labels_path},         {"methods", c.methods},
          {"fractions", c.fractions},        {"seed", c.seed},
          {"train", train_json(c.train)},    {"pca_dim", c.pca_dim},
          {"alpha_step", c.alpha_step},      {"beta_step", c.beta_step},
          {"reward_norm", to_string(c.reward_norm)}};
}

ExperimentConfig config_from(const json& j) {
  ExperimentConfig c;
  c.embedding_paths = j.at("embeddings").get<std::vector<std::string>>();
  c.kg_paths = j.at("kg").get<std::vector<std::string>>();
  c.labels_path = j.at("labels").get<std::string>();
  c.methods = j.at("methods").get<std::vector<std::string>>();
  c.fractions = j.at("fractions").get<std::vector<double>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.train = train_from(j.at("train"));
  c.pca_dim = j.at("pca_dim").get<std::size_t>();
  c.alpha_step = j.at("alpha_step").get<double>();
  c.beta_step = j.at("beta_step").get<double>();
  c.reward_norm = parse_reward_norm(j.at("reward_norm").get<std::string>());
  return c;
}

json dataset_json(const DatasetSummary& d) {
  json sources = json::array();
  for (const auto& [id, dim] : d.source_dims) sources.push_back({{"id", id}, {"dim", dim}});
  return {{"samples", d.samples}, {"classes", d.classes}, {"sources", sources}};
}

DatasetSummary dataset_from(const json& j) {
  DatasetSummary d;
  d.samples = j.at("samples").get<std::size_t>();
  d.classes = j.at("classes").get<int>();
  for (const auto& s : j.at("sources"))
    d.source_dims.emplace_back(s.at("id").get<std::string>(), s.at("dim").get<std::size_t>());
  return d;
}

json provenance_json(const ExperimentConfig& c, const DatasetSummary& d) {
  return {{"seed", c.seed},
          {"prng", std::string(kPrngName)},
          {"formats", {{"emb", kEmbVersion}, {"netv", kNetVersion}, {"ensv", kEnsembleVersion},
                       {"report", kReportSchemaVersion}}},
          {"config", config_json(c)},
          {"dataset", dataset_json(d)}};
}

json confusion_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (int g = 0; g < cm.classes; ++g) {
    json row = json::array();
    for (int p = 0; p < cm.classes; ++p) row.push_back(cm.at(g, p));
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix confusion_from(const json& j) {
  ConfusionMatrix cm;
  cm.classes = static_cast<int>(j.size());
  for (const auto& row : j) {
    require(row.size() == j.size(), ErrorKind::Parse, "confusion matrix is not square");
    for (const auto& v : row) {
      cm.counts.push_back(v.get<std::uint64_t>());
      cm.total += cm.counts.back();
    }
  }
  return cm;
}

json display_json(double accuracy, double kappa) {
  return {{"accuracy", display_2dp(accuracy)}, {"kappa", display_2dp(kappa)}};
}

json row_json(const CellResult& r) {
  json j = {{"method", r.method},
            {"fraction", r.fraction},
            {"n_train", r.n_train},
            {"n_test", r.n_test},
            {"accuracy", r.accuracy},
            {"kappa", r.kappa.kappa},
            {"p_o", r.kappa.observed},
            {"p_e", r.kappa.expected},
            {"confusion", confusion_json(r.confusion)}};
  if (r.alpha) {
    j["alpha"] = *r.alpha;
    j["alpha_train_loss"] = r.alpha_train_loss.value_or(0);
  }
  if (r.beta) {
    j["beta"] = *r.beta;
    json cands = json::array();
    for (const auto& c : r.beta_validation) cands.push_back({{"beta", c.beta}, {"accuracy", c.validation_accuracy}});
    j["beta_validation"] = cands;
  }
  j["display"] = display_json(r.accuracy, r.kappa.kappa);
  return j;
}

CellResult row_from(const json& j) {
  CellResult r;
  r.method = j.at("method").get<std::string>();
  r.fraction = j.at("fraction").get<double>();
  r.n_train = j.at("n_train").get<std::size_t>();
  r.n_test = j.at("n_test").get<std::size_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.kappa.kappa = j.at("kappa").get<double>();
  r.kappa.observed = j.at("p_o").get<double>();
  r.kappa.expected = j.at("p_e").get<double>();
  r.confusion = confusion_from(j.at("confusion"));
  if (j.contains("alpha")) {
    r.alpha = j.at("alpha").get<std::vector<double>>();
    r.alpha_train_loss = j.at("alpha_train_loss").get<std::size_t>();
  }
  if (j.contains("beta")) {
    r.beta = j.at("beta").get<double>();
    for (const auto& c : j.at("beta_validation"))
      r.beta_validation.push_back({c.at("beta").get<double>(), c.at("accuracy").get<double>()});
  }
  return r;
}

json parse_document(const std::string& text, const std::string& kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("report JSON: ") + e.what());
  }
  require(j.value("schema_version", -1) == kReportSchemaVersion, ErrorKind::UnsupportedVersion,
          "report schema version");
  require(j.value("kind", std::string()) == kind, ErrorKind::Parse, "expected a " + kind + " report");
  return j;
}

template <class F> auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("report JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  require(!out.fail(), ErrorKind::Io, "failed writing " + path.string());
}

} // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  fail(ErrorKind::Config, "unknown report format '" + name + "' (expected json or csv)");
}

std::string to_json(const EvaluationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(row_json(r));
  json means = json::array();
  for (const auto& m : report.means)
    means.push_back({{"method", m.method}, {"accuracy", m.accuracy}, {"kappa", m.kappa},
                     {"display", display_json(m.accuracy, m.kappa)}});
  const json doc = {{"schema_version", kReportSchemaVersion},
                    {"kind", "evaluation"},
                    {"provenance", provenance_json(report.config, report.dataset)},
                    {"methods", report.methods},
                    {"rows", rows},
                    {"means", means}};
  return doc.dump(2) + "\n";
}

std::string to_json(const AblationReport& report) {
  json points = json::array();
  for (const auto& p : report.points)
    points.push_back({{"value", p.value},
                      {"accuracy", p.accuracy},
                      {"kappa", p.kappa},
                      {"fraction_accuracy", p.fraction_accuracy},
                      {"fraction_kappa", p.fraction_kappa},
                      {"display", display_json(p.accuracy, p.kappa)}});
  const json doc = {{"schema_version", kReportSchemaVersion},
                    {"kind", "ablation"},
                    {"provenance", provenance_json(report.config, report.dataset)},
                    {"param", to_string(report.param)},
                    {"points", points}};
  return doc.dump(2) + "\n";
}

EvaluationReport evaluation_from_json(const std::string& text) {
  const json j = parse_document(text, "evaluation");
  return guarded([&] {
    EvaluationReport r;
    r.config = config_from(j.at("provenance").at("config"));
    r.dataset = dataset_from(j.at("provenance").at("dataset"));
    r.methods = j.at("methods").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) r.rows.push_back(row_from(row));
    for (const auto& m : j.at("means"))
      r.means.push_back({m.at("method").get<std::string>(), m.at("accuracy").get<double>(), m.at("kappa").get<double>()});
    return r;
  });
}

AblationReport ablation_from_json(const std::string& text) {
  const json j = parse_document(text, "ablation");
  return guarded([&] {
    AblationReport r;
    r.config = config_from(j.at("provenance").at("config"));
    r.dataset = dataset_from(j.at("provenance").at("dataset"));
    r.param = parse_param(j.at("param").get<std::string>());
    for (const auto& p : j.at("points")) {
      AblationPoint point;
      point.value = p.at("value").get<double>();
      point.accuracy = p.at("accuracy").get<double>();
      point.kappa = p.at("kappa").get<double>();
      point.fraction_accuracy = p.at("fraction_accuracy").get<std::vector<double>>();
      point.fraction_kappa = p.at("fraction_kappa").get<std::vector<double>>();
      r.points.push_back(std::move(point));
    }
    return r;
  });
}

std::string to_csv(const EvaluationReport& report) {
  std::string out = "method,fraction,accuracy,kappa\n";
  for (const auto& r : report.rows)
    out += r.method + "," + fraction_tag(r.fraction) + "," + number(r.accuracy) + "," + number(r.kappa.kappa) + "\n";
  for (const auto& m : report.means)
    out += m.method + ",mean," + number(m.accuracy) + "," + number(m.kappa) + "\n";
  return out;
}

std::string to_csv(const AblationReport& report) {
  std::string out = to_string(report.param) + ",accuracy,kappa\n";
  for (const auto& p : report.points) out += number(p.value) + "," + number(p.accuracy) + "," + number(p.kappa) + "\n";
  return out;
}

void emit(const EvaluationReport& report, ReportFormat format, const std::filesystem::path& path) {
  write_text(path, format == ReportFormat::json ? to_json(report) : to_csv(report));
}

void emit(const AblationReport& report, ReportFormat format, const std::filesystem::path& path) {
  write_text(path, format == ReportFormat::json ? to_json(report) : to_csv(report));
}

} // namespace kgens
