#include "kgens/error.hpp"
#include "kgens/random.hpp"
#include "kgens/report.hpp"
#include "kgens/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace kgens;

namespace {

ExperimentConfig make_config(std::vector<std::string> embeddings, std::string labels, std::vector<std::string> methods,
                             std::vector<std::string> kg, std::vector<double> fractions, std::uint64_t seed,
                             std::size_t epochs, double lr, std::size_t pca_dim, std::size_t jobs) {
  ExperimentConfig c;
  c.embedding_paths = std::move(embeddings);
  c.labels_path = std::move(labels);
  c.methods = std::move(methods);
  c.kg_paths = std::move(kg);
  if (!fractions.empty()) c.fractions = std::move(fractions);
  c.seed = seed;
  c.train.epochs = epochs;
  c.train.learning_rate = lr;
  c.pca_dim = pca_dim;
  c.jobs = jobs;
  return c;
}

} // namespace

PYBIND11_MODULE(_kgens, m) {
  m.doc() = "Embedding ensembles (baseline, ShE, SE, DE) over precomputed embeddings";

  static py::exception<Error> error_type(m, "KgensError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // The kind leads the message so callers can match on it.
      PyErr_SetString(error_type.ptr(), e.what());
    }
  });

  m.attr("PRNG_NAME") = std::string(kPrngName);
  m.attr("REPORT_SCHEMA_VERSION") = kReportSchemaVersion;

  m.def("load_embeddings", [](const std::filesystem::path& path) {
    const auto set = load_embeddings(path);
    return py::make_tuple(set.source_id, Eigen::MatrixXf(set.vectors));
  }, py::arg("path"), "Returns (source_id, float32 matrix).");

  m.def("write_embeddings", [](const std::filesystem::path& path, const Eigen::MatrixXf& vectors) {
    EmbeddingSet set;
    set.vectors = vectors;
    write_embeddings(path, set);
  }, py::arg("path"), py::arg("vectors"));

  m.def("accuracy", &accuracy, py::arg("pred"), py::arg("gold"));
  m.def("cohen_kappa", &cohen_kappa, py::arg("pred"), py::arg("gold"), py::arg("classes"));
  m.def("kappa_terms", [](const Labels& pred, const Labels& gold, int classes) {
    const auto t = kappa_terms(pred, gold, classes);
    return py::dict(py::arg("p_o") = t.observed, py::arg("p_e") = t.expected, py::arg("kappa") = t.kappa);
  }, py::arg("pred"), py::arg("gold"), py::arg("classes"));

  m.def("pca", [](const Eigen::MatrixXd& data, std::size_t k) {
    const auto model = pca_fit(data, k);
    return py::make_tuple(Eigen::MatrixXd(pca_transform(model, data)), Eigen::MatrixXd(model.components),
                          Eigen::VectorXd(model.explained_variance));
  }, py::arg("data"), py::arg("k"), "Returns (projected, components, explained_variance).");

  m.def("synth", [](const std::string& spec_json, const std::filesystem::path& out_dir,
                    std::optional<std::uint64_t> seed) {
    const auto spec = parse_synthetic_spec(spec_json);
    const auto data = gen_synthetic(spec, seed.value_or(spec.seed));
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> paths;
    for (const auto& src : data.sources) {
      const auto path = out_dir / (src.source_id + ".emb");
      write_embeddings(path, src);
      paths.push_back(path.string());
    }
    write_labels(out_dir / "labels.tsv", data.labels);
    return paths;
  }, py::arg("spec_json"), py::arg("out_dir"), py::arg("seed") = py::none(),
     "Writes one EMB per source plus labels.tsv; returns the EMB paths.");

  m.def("run", [](std::vector<std::string> embeddings, std::string labels, std::vector<std::string> methods,
                  std::vector<std::string> kg, std::vector<double> fractions, std::uint64_t seed, std::size_t epochs,
                  double lr, std::size_t pca_dim, std::size_t jobs) {
    const auto config = make_config(std::move(embeddings), std::move(labels), std::move(methods), std::move(kg),
                                    std::move(fractions), seed, epochs, lr, pca_dim, jobs);
    py::gil_scoped_release release;
    return to_json(run(config));
  }, py::arg("embeddings"), py::arg("labels"), py::arg("methods"), py::arg("kg") = std::vector<std::string>{},
     py::arg("fractions") = std::vector<double>{}, py::arg("seed") = 42, py::arg("epochs") = 20,
     py::arg("lr") = 2e-5, py::arg("pca_dim") = 100, py::arg("jobs") = 1, "Runs the protocol; returns report JSON.");

  m.def("ablate", [](std::string param, std::vector<double> grid, std::vector<std::string> embeddings,
                     std::string labels, std::vector<std::string> kg, std::vector<double> fractions,
                     std::uint64_t seed, std::size_t epochs, double lr, std::size_t pca_dim, std::size_t jobs) {
    const auto config = make_config(std::move(embeddings), std::move(labels), {}, std::move(kg), std::move(fractions),
                                    seed, epochs, lr, pca_dim, jobs);
    require(param == "alpha" || param == "beta", ErrorKind::Config, "param must be alpha or beta");
    py::gil_scoped_release release;
    return to_json(ablate(config, param == "alpha" ? AblationParam::alpha : AblationParam::beta, std::move(grid)));
  }, py::arg("param"), py::arg("grid"), py::arg("embeddings"), py::arg("labels"),
     py::arg("kg") = std::vector<std::string>{}, py::arg("fractions") = std::vector<double>{}, py::arg("seed") = 42,
     py::arg("epochs") = 20, py::arg("lr") = 2e-5, py::arg("pca_dim") = 100, py::arg("jobs") = 1,
     "Sweeps alpha or beta; returns ablation report JSON.");
}
