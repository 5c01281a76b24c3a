#pragma once

#include "kgens/dataset_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kgens {

enum class SourceRole { signal, noise, kg_correlated };

struct SyntheticSource {
  std::string id;
  std::size_t dim = 0;
  SourceRole role = SourceRole::noise;
  // kg-correlated only: which sources' concatenation it mirrors. Empty means
  // every signal source, in declaration order.
  std::vector<std::string> correlates_with;
};

/// Generator for datasets whose decision structure is known by construction.
///
/// Signal sources share the label: on coordinates 0..c-1 each signal source
/// holds a large latent term, and the terms of all signal sources sum to
/// strength * (onehot(y) - 1/c). Any proper subset of signal sources is close
/// to chance; the concatenation is linearly separable.
///
/// kg-correlated sources copy the concatenation of their reference sources,
/// multiplied by +1 for cleanly-labelled samples and -1 for samples whose label
/// was flipped by `label_noise`. After PCA their cosine with the fused
/// embedding is therefore near +1 (clean) or -1 (noised).
///
/// All other coordinates are zero-mean Gaussian noise with distinct scales so
/// PCA directions are well separated.
struct SyntheticSpec {
  std::size_t n = 0;
  int classes = 2;
  std::vector<SyntheticSource> sources;
  std::uint64_t seed = 42;
  double label_noise = 0.0;
  double signal_strength = 2.0;
  double latent_scale = 8.0;
  double class_noise = 0.1;
};

struct SyntheticData {
  LabeledDataset dataset;
  Labels true_labels;
  std::vector<bool> noised;
};

SyntheticSpec parse_synthetic_spec(const std::string& json_text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

SyntheticData gen_synthetic_detailed(const SyntheticSpec& spec, std::uint64_t seed);

inline LabeledDataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  return gen_synthetic_detailed(spec, seed).dataset;
}

/// Two 32-dim sources, labels recoverable only from their concatenation.
SyntheticSpec signal_split_spec(std::size_t n = 500, int classes = 2);

/// Two signal model sources plus "cnet" (kg-correlated, 300-dim) and "wiki"
/// (noise, 500-dim), with `label_noise` of the labels flipped.
SyntheticSpec kg_correlated_spec(std::size_t n = 500, double label_noise = 0.2);

/// One noise source, labels independent of the vectors.
SyntheticSpec chance_spec(std::size_t n = 300, int classes = 2, std::size_t dim = 16);

} // namespace kgens
