#include "kgens/ensemble_she.hpp"
#include "kgens/error.hpp"

#include <doctest.h>

#include <array>
#include <random>

using namespace kgens;

namespace {

ProbabilityTable table(std::string id, std::initializer_list<std::array<double, 2>> rows) {
  ProbabilityTable t{std::move(id), Matrix(static_cast<Eigen::Index>(rows.size()), 2)};
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    t.probs(r, 0) = row[0];
    t.probs(r, 1) = row[1];
    ++r;
  }
  return t;
}

ProbabilityTable random_table(std::string id, Eigen::Index n, Eigen::Index c, std::mt19937& gen) {
  std::gamma_distribution<double> g(1.0, 1.0);
  ProbabilityTable t{std::move(id), Matrix(n, c)};
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index k = 0; k < c; ++k) t.probs(r, k) = g(gen) + 1e-9;
    t.probs.row(r) /= t.probs.row(r).sum();
  }
  return t;
}

Labels random_labels(std::size_t n, int c, std::mt19937& gen) {
  std::uniform_int_distribution<int> d(0, c - 1);
  Labels y(n);
  for (auto& v : y) v = d(gen);
  return y;
}

} // namespace

TEST_SUITE("ensemble_she") {

TEST_CASE("combine example") {
  const std::vector<ProbabilityTable> t{table("a", {{0.2, 0.8}}), table("b", {{0.6, 0.4}})};
  const auto out = combine(t, SimplexWeights::pair(0.5));
  CHECK(out.probs(0, 0) == doctest::Approx(0.4));
  CHECK(out.probs(0, 1) == doctest::Approx(0.6));
  CHECK(predict(t, SimplexWeights::pair(0.5)) == Labels{1});
}

TEST_CASE("alpha endpoints select one model exactly") {
  const std::vector<ProbabilityTable> t{table("a", {{0.2, 0.8}, {0.7, 0.3}}), table("b", {{0.6, 0.4}, {0.1, 0.9}})};
  CHECK(combine(t, SimplexWeights::pair(1.0)).probs == t[0].probs);
  CHECK(combine(t, SimplexWeights::pair(0.0)).probs == t[1].probs);
  CHECK(predict(t, SimplexWeights::pair(1.0)) == Labels{1, 0});
  CHECK(predict(t, SimplexWeights::pair(0.0)) == Labels{0, 1});
}

TEST_CASE("an exact tie predicts the smallest class") {
  const std::vector<ProbabilityTable> t{table("a", {{0.5, 0.5}}), table("b", {{0.5, 0.5}})};
  CHECK(predict(t, SimplexWeights::pair(0.3)) == Labels{0});
}

TEST_CASE("zero_one_loss examples") {
  CHECK(zero_one_loss({0, 1, 1}, {0, 1, 1}) == 0);
  CHECK(zero_one_loss({1, 1, 0}, {0, 1, 1}) == 2);
  CHECK(zero_one_loss({}, {}) == 0);
  CHECK_THROWS_AS(zero_one_loss({0}, {0, 1}), Error);
}

TEST_CASE("fit_alpha picks the dominant model") {
  const std::vector<ProbabilityTable> t{table("good", {{0.9, 0.1}, {0.2, 0.8}, {0.7, 0.3}}),
                                        table("bad", {{0.1, 0.9}, {0.8, 0.2}, {0.3, 0.7}})};
  const auto fit = fit_alpha(t, {0, 1, 0});
  CHECK(fit.loss == 0);
  CHECK(fit.weights.alpha[0] == 1.0);
  CHECK(fit.candidates == 11);
}

TEST_CASE("identical tables tie everywhere and resolve to (1, 0)") {
  const auto a = table("a", {{0.9, 0.1}, {0.4, 0.6}});
  auto b = a;
  b.source_id = "b";
  const std::vector<ProbabilityTable> t{a, b};
  const auto fit = fit_alpha(t, {1, 1});
  CHECK(fit.weights.alpha == std::vector<double>{1.0, 0.0});
  CHECK(fit.loss == 1);
}

// Losses over the 11-point grid frozen from tests/oracles/oracles.py:
// [2,2,1,2,2,1,1,1,2,2,2]; the minimum 1 is shared by 0.2 and 0.5..0.7.
TEST_CASE("six-sample exhaustive search") {
  const double six[6][3] = {{0, 0.6, 0.15}, {0, 0.9, 0.35}, {1, 0.8, 0.45},
                            {1, 0.9, 0.2},  {0, 0.2, 0.2},  {1, 0.8, 0.8}};
  ProbabilityTable a{"a", Matrix(6, 2)}, b{"b", Matrix(6, 2)};
  Labels gold;
  for (int i = 0; i < 6; ++i) {
    gold.push_back(static_cast<int>(six[i][0]));
    a.probs(i, 0) = 1 - six[i][1];
    a.probs(i, 1) = six[i][1];
    b.probs(i, 0) = 1 - six[i][2];
    b.probs(i, 1) = six[i][2];
  }
  const std::vector<ProbabilityTable> t{a, b};
  const std::size_t expected[11] = {2, 2, 1, 2, 2, 1, 1, 1, 2, 2, 2};
  for (int j = 0; j <= 10; ++j)
    CHECK(zero_one_loss(predict(t, SimplexWeights::pair(j / 10.0)), gold) == expected[j]);
  const auto fit = fit_alpha(t, gold);
  CHECK(fit.loss == 1);
  CHECK(fit.weights.alpha[0] == doctest::Approx(0.7));
}

TEST_CASE("fitted loss never exceeds either endpoint and combined rows stay stochastic") {
  std::mt19937 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 2 + trial % 3;
    const std::vector<ProbabilityTable> t{random_table("a", 25, c, gen), random_table("b", 25, c, gen)};
    const Labels gold = random_labels(25, c, gen);
    const auto fit = fit_alpha(t, gold);
    CHECK(fit.loss <= zero_one_loss(predict(t, SimplexWeights::pair(1.0)), gold));
    CHECK(fit.loss <= zero_one_loss(predict(t, SimplexWeights::pair(0.0)), gold));
    const auto mixed = combine(t, fit.weights);
    for (Eigen::Index r = 0; r < mixed.probs.rows(); ++r) {
      CHECK(mixed.probs.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(mixed.probs.row(r).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("three-model lattice") {
  const auto points = simplex_lattice(3, 0.1);
  CHECK(points.size() == 66);
  CHECK(points.front().alpha == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(points.back().alpha == std::vector<double>{0.0, 0.0, 1.0});
  for (const auto& p : points) CHECK_NOTHROW(p.validate());
  CHECK(simplex_lattice(2, 0.5).size() == 3);
  CHECK(simplex_lattice(4, 0.25).size() == 35);

  std::mt19937 gen(9);
  const std::vector<ProbabilityTable> t{random_table("a", 30, 3, gen), random_table("b", 30, 3, gen),
                                        random_table("c", 30, 3, gen)};
  const Labels gold = random_labels(30, 3, gen);
  const auto fit = fit_alpha(t, gold);
  CHECK(fit.candidates == 66);
  for (const auto& p : points) CHECK(fit.loss <= zero_one_loss(predict(t, p), gold));
}

TEST_CASE("ShE argument errors") {
  CHECK_THROWS_AS(simplex_lattice(5, 0.1), Error);
  CHECK_THROWS_AS(simplex_lattice(2, 0.3), Error);
  CHECK_THROWS_AS(simplex_lattice(2, 0.0), Error);
  const std::vector<ProbabilityTable> t{table("a", {{0.2, 0.8}}), table("b", {{0.6, 0.4}})};
  CHECK_THROWS_AS(combine(t, SimplexWeights{{0.7, 0.7}}), Error);
  CHECK_THROWS_AS(combine(t, SimplexWeights{{1.0}}), Error);
  CHECK_THROWS_AS(fit_alpha(t, {0, 1}), Error);
  const std::vector<ProbabilityTable> ragged{table("a", {{0.2, 0.8}}), table("b", {{0.6, 0.4}, {0.5, 0.5}})};
  CHECK_THROWS_AS(combine(ragged, SimplexWeights::pair(0.5)), Error);
  CHECK_THROWS_AS(table("bad", {{0.7, 0.7}}).validate(), Error);
}

}
