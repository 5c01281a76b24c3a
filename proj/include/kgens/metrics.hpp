#pragma once

#include "kgens/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kgens {

/// Rows are gold labels, columns are predictions.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::uint64_t> counts;  // classes * classes, row-major
  std::uint64_t total = 0;

  std::uint64_t at(int gold, int pred) const {
    return counts[static_cast<std::size_t>(gold) * static_cast<std::size_t>(classes) + static_cast<std::size_t>(pred)];
  }
  std::uint64_t gold_count(int k) const;
  std::uint64_t pred_count(int k) const;
  std::uint64_t agreements() const;
};

ConfusionMatrix confusion(const Labels& pred, const Labels& gold, int classes);

double accuracy(const Labels& pred, const Labels& gold);

struct KappaTerms {
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  double kappa = 0.0;
};

/// Cohen's kappa between predictions and gold labels, treated as two raters.
/// p_e sums products of the two marginals. When p_e == 1 both raters used a
/// single (shared) class, so kappa is defined as 1.
KappaTerms kappa_terms(const ConfusionMatrix& cm);
KappaTerms kappa_terms(const Labels& pred, const Labels& gold, int classes);

double cohen_kappa(const Labels& pred, const Labels& gold, int classes);

/// Two-decimal display string ("0.42").
std::string display_2dp(double value);

} // namespace kgens
