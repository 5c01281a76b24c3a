#include "kgens/error.hpp"
#include "kgens/linalg.hpp"
#include "kgens/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgens;

namespace {

Matrix as_matrix(const EmbeddingSet& s) { return s.vectors.cast<double>(); }

// Perceptron with bias; returns final training accuracy after `epochs`
// passes (1.0 means a separating hyperplane was found).
double perceptron(const Matrix& x, const Labels& y, int epochs) {
  Vector w = Vector::Zero(x.cols());
  double b = 0.0;
  for (int e = 0; e < epochs; ++e) {
    bool clean = true;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double s = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
      if (s * (x.row(i).dot(w) + b) <= 0.0) {
        w += s * x.row(i).transpose();
        b += s;
        clean = false;
      }
    }
    if (clean) return 1.0;
  }
  std::size_t ok = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    ok += ((x.row(i).dot(w) + b) > 0.0) == (y[static_cast<std::size_t>(i)] == 1);
  return static_cast<double>(ok) / static_cast<double>(x.rows());
}

} // namespace

TEST_SUITE("synthetic") {

TEST_CASE("signal split: concatenation separable, single sources are not") {
  const auto d = gen_synthetic(signal_split_spec(), 42);
  REQUIRE(d.size() == 500);
  const Matrix a = as_matrix(d.source("model_a"));
  const Matrix b = as_matrix(d.source("model_b"));
  const Matrix both = concat_columns(std::vector<Matrix>{a, b});
  CHECK(perceptron(both, d.labels.labels, 2000) == 1.0);
  // The LP oracle finds neither single source separable; a perceptron therefore
  // cannot reach a clean pass, and stays near chance.
  CHECK(perceptron(a, d.labels.labels, 200) < 0.7);
  CHECK(perceptron(b, d.labels.labels, 200) < 0.7);
}

TEST_CASE("same spec and seed give identical data; other seeds differ") {
  const auto spec = signal_split_spec(100);
  const auto x = gen_synthetic(spec, 7);
  const auto y = gen_synthetic(spec, 7);
  const auto z = gen_synthetic(spec, 8);
  CHECK(x.labels.labels == y.labels.labels);
  CHECK(x.source("model_a").vectors == y.source("model_a").vectors);
  CHECK(x.source("model_a").vectors != z.source("model_a").vectors);
  CHECK(x.source("model_a").dim() == z.source("model_a").dim());
}

TEST_CASE("chance spec labels are balanced-ish and independent of a mean split") {
  const auto d = gen_synthetic(chance_spec(), 42);
  std::size_t ones = 0;
  for (int l : d.labels.labels) ones += l == 1;
  CHECK(ones > 100);
  CHECK(ones < 200);
}

TEST_CASE("kg-correlated source mirrors the signal with sign flips on noised rows") {
  const auto data = gen_synthetic_detailed(kg_correlated_spec(200, 0.2), 42);
  const auto& ds = data.dataset;
  CHECK(ds.source("cnet").dim() == 300);
  CHECK(ds.source("wiki").dim() == 500);
  std::size_t noised = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool flipped = ds.labels.labels[i] != data.true_labels[i];
    CHECK(flipped == static_cast<bool>(data.noised[i]));
    noised += data.noised[i];
    const auto row = static_cast<Eigen::Index>(i);
    // leading coordinates carry +/- the concatenated signal sources
    const double a0 = ds.source("model_a").vectors(row, 0);
    const double c0 = ds.source("cnet").vectors(row, 0);
    CHECK(std::abs(std::abs(c0) - std::abs(a0)) < 1e-5);
    CHECK((c0 * a0 >= 0) == !data.noised[i]);
  }
  CHECK(noised > 20);
  CHECK(noised < 60);
}

TEST_CASE("spec JSON round-trip and validation") {
  const auto spec = kg_correlated_spec();
  const auto back = parse_synthetic_spec(synthetic_spec_to_json(spec));
  CHECK(back.n == spec.n);
  CHECK(back.sources.size() == spec.sources.size());
  CHECK(back.label_noise == spec.label_noise);
  CHECK(back.sources[2].role == SourceRole::kg_correlated);

  const auto minimal = parse_synthetic_spec(
      R"({"n": 10, "classes": 2, "seed": 3, "sources": [{"id": "s", "dim": 4, "role": "signal"}]})");
  CHECK(minimal.seed == 3);
  CHECK(minimal.sources[0].role == SourceRole::signal);

  CHECK_THROWS_AS(gen_synthetic(parse_synthetic_spec(
                      R"({"n": 0, "classes": 2, "sources": [{"id": "s", "dim": 4, "role": "noise"}]})"), 1),
                  Error);
  CHECK_THROWS_AS(gen_synthetic(parse_synthetic_spec(
                      R"({"n": 5, "classes": 2, "sources": [{"id": "s", "dim": 0, "role": "noise"}]})"), 1),
                  Error);
  CHECK_THROWS_AS(parse_synthetic_spec(R"({"n": 5, "sources": [{"id": "s", "dim": 2, "role": "loud"}]})"), Error);
  CHECK_THROWS_AS(parse_synthetic_spec("{not json"), Error);
}

}
