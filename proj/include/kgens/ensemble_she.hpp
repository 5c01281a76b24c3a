#pragma once

#include "kgens/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace kgens {

/// Per-sample class probabilities from one model (n x c).
struct ProbabilityTable {
  std::string source_id;
  Matrix probs;

  void validate() const;
};

/// Convex weights over models: each in [0,1], summing to 1 (1e-9).
struct SimplexWeights {
  std::vector<double> alpha;

  void validate() const;
  static SimplexWeights pair(double first) { return {{first, 1.0 - first}}; }
};

ProbabilityTable combine(std::span<const ProbabilityTable> tables, const SimplexWeights& weights);

/// argmax of the combined table, ties to the smallest class index.
Labels predict(std::span<const ProbabilityTable> tables, const SimplexWeights& weights);

std::size_t zero_one_loss(const Labels& pred, const Labels& gold);

struct AlphaFit {
  SimplexWeights weights;
  std::size_t loss = 0;
  std::size_t candidates = 0;
};

/// Exhaustive 0/1-loss minimisation over the simplex lattice with spacing
/// `grid_step` (1/step must be an integer). For two models the lattice is
/// alpha in {0, step, ..., 1} as (alpha, 1-alpha). Ties go to the candidate
/// that is lexicographically largest, i.e. most weight on earlier models.
/// Supports up to four models.
AlphaFit fit_alpha(std::span<const ProbabilityTable> tables, const Labels& gold, double grid_step = 0.1);

/// Points of the lattice in the order fit_alpha visits them.
std::vector<SimplexWeights> simplex_lattice(std::size_t models, double grid_step);

} // namespace kgens
