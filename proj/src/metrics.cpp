#include "kgens/metrics.hpp"

#include "kgens/error.hpp"

#include <cstdio>
#include <string>

namespace kgens {

namespace {

void check_pair(const Labels& pred, const Labels& gold) {
  require(pred.size() == gold.size(), ErrorKind::DimensionMismatch,
          "prediction list has " + std::to_string(pred.size()) + " labels, gold has " + std::to_string(gold.size()));
  require(!pred.empty(), ErrorKind::InvalidArgument, "cannot score an empty label list");
}

} // namespace

std::uint64_t ConfusionMatrix::gold_count(int k) const {
  std::uint64_t sum = 0;
  for (int p = 0; p < classes; ++p) sum += at(k, p);
  return sum;
}

std::uint64_t ConfusionMatrix::pred_count(int k) const {
  std::uint64_t sum = 0;
  for (int g = 0; g < classes; ++g) sum += at(g, k);
  return sum;
}

std::uint64_t ConfusionMatrix::agreements() const {
  std::uint64_t sum = 0;
  for (int k = 0; k < classes; ++k) sum += at(k, k);
  return sum;
}

ConfusionMatrix confusion(const Labels& pred, const Labels& gold, int classes) {
  check_pair(pred, gold);
  require(classes >= 1, ErrorKind::InvalidArgument, "class count must be positive");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int g = gold[i], p = pred[i];
    if (g < 0 || g >= classes || p < 0 || p >= classes)
      fail(ErrorKind::InvalidLabel, "label pair (" + std::to_string(g) + ", " + std::to_string(p) +
                                        ") at position " + std::to_string(i) + " outside 0.." +
                                        std::to_string(classes - 1));
    ++cm.counts[static_cast<std::size_t>(g) * static_cast<std::size_t>(classes) + static_cast<std::size_t>(p)];
  }
  cm.total = pred.size();
  return cm;
}

double accuracy(const Labels& pred, const Labels& gold) {
  check_pair(pred, gold);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == gold[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

KappaTerms kappa_terms(const ConfusionMatrix& cm) {
  require(cm.total > 0, ErrorKind::InvalidArgument, "cannot score an empty confusion matrix");
  const double total = static_cast<double>(cm.total);
  KappaTerms t;
  t.observed = static_cast<double>(cm.agreements()) / total;
  for (int k = 0; k < cm.classes; ++k)
    t.expected += (static_cast<double>(cm.gold_count(k)) / total) * (static_cast<double>(cm.pred_count(k)) / total);
  if (t.expected >= 1.0) {
    // Both raters put every sample in one shared class: perfect degenerate agreement.
    t.kappa = 1.0;
    return t;
  }
  t.kappa = (t.observed - t.expected) / (1.0 - t.expected);
  return t;
}

KappaTerms kappa_terms(const Labels& pred, const Labels& gold, int classes) {
  const auto cm = confusion(pred, gold, classes);
  KappaTerms t = kappa_terms(cm);
  // p_o is the shared accuracy routine, not a second counting path.
  t.observed = accuracy(pred, gold);
  if (t.expected < 1.0) t.kappa = (t.observed - t.expected) / (1.0 - t.expected);
  return t;
}

double cohen_kappa(const Labels& pred, const Labels& gold, int classes) {
  return kappa_terms(pred, gold, classes).kappa;
}

std::string display_2dp(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

} // namespace kgens
