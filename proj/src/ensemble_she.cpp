#include "kgens/ensemble_she.hpp"

#include "kgens/classifier.hpp"
#include "kgens/error.hpp"

#include <cmath>
#include <functional>

namespace kgens {

namespace {

void check_tables(std::span<const ProbabilityTable> tables) {
  require(!tables.empty(), ErrorKind::InvalidArgument, "no probability tables");
  for (const auto& t : tables) {
    require(t.probs.rows() == tables.front().probs.rows() && t.probs.cols() == tables.front().probs.cols(),
            ErrorKind::DimensionMismatch,
            "probability table '" + t.source_id + "' differs in shape from '" + tables.front().source_id + "'");
  }
  require(tables.front().probs.rows() > 0, ErrorKind::InvalidArgument, "probability tables are empty");
}

std::size_t lattice_resolution(double grid_step) {
  require(grid_step > 0.0 && grid_step <= 1.0, ErrorKind::InvalidArgument, "grid step must lie in (0,1]");
  const double steps = 1.0 / grid_step;
  const auto resolution = static_cast<std::size_t>(std::llround(steps));
  require(std::abs(steps - static_cast<double>(resolution)) < 1e-9 * steps, ErrorKind::InvalidArgument,
          "grid step must divide 1 evenly");
  return resolution;
}

} // namespace

void ProbabilityTable::validate() const {
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const double p = probs(r, k);
      require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidArgument,
              "table '" + source_id + "' row " + std::to_string(r) + " has entry outside [0,1]");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-6, ErrorKind::InvalidArgument,
            "table '" + source_id + "' row " + std::to_string(r) + " does not sum to 1");
  }
}

void SimplexWeights::validate() const {
  require(!alpha.empty(), ErrorKind::InvalidArgument, "empty weight vector");
  double sum = 0.0;
  for (double a : alpha) {
    require(a >= 0.0 && a <= 1.0, ErrorKind::InvalidArgument, "ensemble weight outside [0,1]");
    sum += a;
  }
  require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "ensemble weights do not sum to 1");
}

ProbabilityTable combine(std::span<const ProbabilityTable> tables, const SimplexWeights& weights) {
  check_tables(tables);
  weights.validate();
  require(weights.alpha.size() == tables.size(), ErrorKind::DimensionMismatch,
          std::to_string(weights.alpha.size()) + " weights for " + std::to_string(tables.size()) + " tables");
  ProbabilityTable out;
  out.source_id = "she";
  out.probs = Matrix::Zero(tables.front().probs.rows(), tables.front().probs.cols());
  for (std::size_t l = 0; l < tables.size(); ++l) {
    if (weights.alpha[l] == 0.0) continue;
    out.probs += weights.alpha[l] * tables[l].probs;
  }
  return out;
}

Labels predict(std::span<const ProbabilityTable> tables, const SimplexWeights& weights) {
  return argmax_rows(combine(tables, weights).probs);
}

std::size_t zero_one_loss(const Labels& pred, const Labels& gold) {
  require(pred.size() == gold.size(), ErrorKind::DimensionMismatch,
          "prediction list has " + std::to_string(pred.size()) + " labels, gold has " + std::to_string(gold.size()));
  std::size_t misses = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) misses += pred[i] != gold[i] ? 1 : 0;
  return misses;
}

std::vector<SimplexWeights> simplex_lattice(std::size_t models, double grid_step) {
  require(models >= 1, ErrorKind::InvalidArgument, "lattice needs at least one model");
  require(models <= 4, ErrorKind::InvalidArgument,
          "simplex lattice search supports at most 4 models, got " + std::to_string(models));
  const std::size_t resolution = lattice_resolution(grid_step);
  std::vector<SimplexWeights> points;
  std::vector<std::size_t> counts(models, 0);
  // Depth-first with the largest count first, so points come out in
  // descending lexicographic order.
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t slot, std::size_t remaining) {
    if (slot + 1 == models) {
      counts[slot] = remaining;
      SimplexWeights w;
      for (auto c : counts) w.alpha.push_back(static_cast<double>(c) / static_cast<double>(resolution));
      points.push_back(std::move(w));
      return;
    }
    for (std::size_t c = remaining + 1; c-- > 0;) {
      counts[slot] = c;
      visit(slot + 1, remaining - c);
    }
  };
  visit(0, resolution);
  return points;
}

AlphaFit fit_alpha(std::span<const ProbabilityTable> tables, const Labels& gold, double grid_step) {
  check_tables(tables);
  require(static_cast<std::size_t>(tables.front().probs.rows()) == gold.size(), ErrorKind::DimensionMismatch,
          "gold labels do not match probability table rows");
  const auto candidates = simplex_lattice(tables.size(), grid_step);
  AlphaFit best;
  best.candidates = candidates.size();
  bool have = false;
  for (const auto& w : candidates) {
    const std::size_t loss = zero_one_loss(predict(tables, w), gold);
    if (!have || loss < best.loss) {
      best.weights = w;
      best.loss = loss;
      have = true;
    }
  }
  return best;
}

} // namespace kgens
