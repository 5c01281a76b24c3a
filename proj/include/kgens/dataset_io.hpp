#pragma once

#include "kgens/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kgens {

/// EMB container: "EMBV", version u8, dtype u8, reserved u16, n u64, dim u32,
/// then n*dim little-endian float32 values, row-major.
inline constexpr char kEmbMagic[4] = {'E', 'M', 'B', 'V'};
inline constexpr std::uint8_t kEmbVersion = 1;
inline constexpr std::uint8_t kEmbDtypeF32 = 0;
inline constexpr std::size_t kEmbHeaderBytes = 20;

/// One source's per-sample feature vectors.
///
/// `sample_ids` is either empty (rows are positional: row i is row i of the
/// label manifest, which is how EMB files are bound) or holds one unique id
/// per row.
struct EmbeddingSet {
  std::string source_id;
  MatrixF vectors;
  std::vector<std::string> sample_ids;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  bool positional() const { return sample_ids.empty(); }

  /// Throws on non-finite entries, zero dim, or bad/duplicate ids.
  void validate() const;
};

struct LabelTable {
  std::vector<std::string> ids;
  Labels labels;
  int num_classes = 0;

  std::size_t size() const { return ids.size(); }
};

/// Every source holds the label table's sample order.
struct LabeledDataset {
  std::vector<EmbeddingSet> sources;
  LabelTable labels;

  std::size_t size() const { return labels.size(); }
  int num_classes() const { return labels.num_classes; }

  const EmbeddingSet& source(const std::string& id) const;
  bool has_source(const std::string& id) const;
  std::vector<std::string> source_ids() const;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  Indices train;
  Indices test;
};

EmbeddingSet load_embeddings(const std::filesystem::path& path, std::string source_id = {});
void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);

/// Encodes/decodes the EMB byte stream directly (used by the file functions).
/// With `require_finite` off, NaN/Inf payload values are passed through so a
/// caller can report on them.
std::vector<std::uint8_t> encode_embeddings(const MatrixF& vectors);
MatrixF decode_embeddings(std::span<const std::uint8_t> bytes, bool require_finite = true);

/// `num_classes` overrides the inferred 1 + max label when given; it must not
/// be smaller than the inferred value.
LabelTable load_labels(const std::filesystem::path& path, std::optional<int> num_classes = {});
LabelTable parse_labels(const std::string& text, std::optional<int> num_classes = {});
void write_labels(const std::filesystem::path& path, const LabelTable& table);

/// Builds a label table from parallel vectors, inferring the class count.
LabelTable make_label_table(std::vector<std::string> ids, Labels labels,
                            std::optional<int> num_classes = {});

/// Reorders every source to the label order. Never drops samples: a missing or
/// extra id is an error. Positional sets must have exactly as many rows as labels.
LabeledDataset align(std::vector<EmbeddingSet> sources, const LabelTable& labels);

/// Source ids default to the file stem when not given explicitly.
std::string source_id_from_path(const std::filesystem::path& path);

/// One plan per fraction; |test| = round(fraction * m). Each plan draws its own
/// permutation from derive_seed(seed, fraction).
std::vector<SplitPlan> make_splits(std::size_t m, std::span<const double> fractions,
                                   std::uint64_t seed);

/// Rows of `data` listed by `rows`, widened to compute precision.
Matrix gather_rows(const MatrixF& data, std::span<const std::size_t> rows);
Labels gather_labels(const Labels& labels, std::span<const std::size_t> rows);

/// Canonical fraction tag used for seeding and report keys ("0.15").
std::string fraction_tag(double fraction);

} // namespace kgens
