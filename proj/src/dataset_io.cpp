#include "kgens/dataset_io.hpp"

#include "kgens/error.hpp"
#include "kgens/random.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace kgens {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < bytes; ++i) value |= std::uint64_t{in[offset + i]} << (8 * i);
  return value;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

void check_finite(const MatrixF& vectors) {
  for (Eigen::Index r = 0; r < vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < vectors.cols(); ++c)
      if (!std::isfinite(vectors(r, c)))
        fail(ErrorKind::NonFinite,
             "non-finite value at row " + std::to_string(r) + ", column " + std::to_string(c));
}

} // namespace

void EmbeddingSet::validate() const {
  require(vectors.cols() > 0, ErrorKind::Degenerate, "embedding set '" + source_id + "' has dim 0");
  check_finite(vectors);
  if (positional()) return;
  require(sample_ids.size() == size(), ErrorKind::DimensionMismatch,
          "embedding set '" + source_id + "' has " + std::to_string(sample_ids.size()) +
              " ids for " + std::to_string(size()) + " rows");
  std::unordered_set<std::string> seen;
  for (const auto& id : sample_ids)
    if (!seen.insert(id).second) fail(ErrorKind::DuplicateId, "duplicate sample id '" + id + "'");
}

const EmbeddingSet& LabeledDataset::source(const std::string& id) const {
  for (const auto& s : sources)
    if (s.source_id == id) return s;
  fail(ErrorKind::UnknownSource, "unknown source '" + id + "'");
}

bool LabeledDataset::has_source(const std::string& id) const {
  return std::any_of(sources.begin(), sources.end(),
                     [&](const EmbeddingSet& s) { return s.source_id == id; });
}

std::vector<std::string> LabeledDataset::source_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : sources) ids.push_back(s.source_id);
  return ids;
}

std::vector<std::uint8_t> encode_embeddings(const MatrixF& vectors) {
  std::vector<std::uint8_t> out;
  const auto n = static_cast<std::uint64_t>(vectors.rows());
  const auto dim = static_cast<std::uint64_t>(vectors.cols());
  out.reserve(kEmbHeaderBytes + n * dim * 4);
  out.insert(out.end(), std::begin(kEmbMagic), std::end(kEmbMagic));
  out.push_back(kEmbVersion);
  out.push_back(kEmbDtypeF32);
  put_le(out, 0, 2);
  put_le(out, n, 8);
  put_le(out, dim, 4);
  for (Eigen::Index r = 0; r < vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < vectors.cols(); ++c)
      put_le(out, std::bit_cast<std::uint32_t>(vectors(r, c)), 4);
  return out;
}

MatrixF decode_embeddings(std::span<const std::uint8_t> bytes, bool require_finite) {
  if (bytes.size() < kEmbHeaderBytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kEmbMagic, 4) != 0)
      fail(ErrorKind::BadMagic, "missing EMBV magic");
    fail(ErrorKind::Truncated, "header needs " + std::to_string(kEmbHeaderBytes) + " bytes, got " +
                                   std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kEmbMagic, 4) != 0) fail(ErrorKind::BadMagic, "missing EMBV magic");
  if (bytes[4] != kEmbVersion)
    fail(ErrorKind::UnsupportedVersion, "EMB version " + std::to_string(bytes[4]));
  if (bytes[5] != kEmbDtypeF32) fail(ErrorKind::UnsupportedDtype, "EMB dtype " + std::to_string(bytes[5]));
  const std::uint64_t n = get_le(bytes, 8, 8);
  const std::uint64_t dim = get_le(bytes, 16, 4);
  require(dim > 0, ErrorKind::Degenerate, "EMB dim is 0");

  const std::uint64_t payload = bytes.size() - kEmbHeaderBytes;
  // n * dim * 4 may overflow for a hostile header; compare in row units first.
  if (n > payload / 4 / dim || n * dim * 4 > payload)
    fail(ErrorKind::Truncated, "header declares " + std::to_string(n) + "x" + std::to_string(dim) +
                                   " values but payload has " + std::to_string(payload) + " bytes");
  if (n * dim * 4 != payload)
    fail(ErrorKind::Parse, "payload has " + std::to_string(payload - n * dim * 4) + " trailing bytes");

  MatrixF vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::size_t offset = kEmbHeaderBytes;
  for (Eigen::Index r = 0; r < vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < vectors.cols(); ++c, offset += 4)
      vectors(r, c) = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, offset, 4)));
  if (require_finite) check_finite(vectors);
  return vectors;
}

std::string source_id_from_path(const std::filesystem::path& path) {
  return path.stem().string();
}

EmbeddingSet load_embeddings(const std::filesystem::path& path, std::string source_id) {
  const auto bytes = read_file(path);
  EmbeddingSet set;
  set.source_id = source_id.empty() ? source_id_from_path(path) : std::move(source_id);
  try {
    set.vectors = decode_embeddings(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
  return set;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  check_finite(set.vectors);
  write_file(path, encode_embeddings(set.vectors));
}

LabelTable make_label_table(std::vector<std::string> ids, Labels labels,
                            std::optional<int> num_classes) {
  require(ids.size() == labels.size(), ErrorKind::DimensionMismatch, "ids and labels differ in length");
  std::unordered_set<std::string> seen;
  int max_label = -1;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second) fail(ErrorKind::DuplicateId, "duplicate sample id '" + ids[i] + "'");
    if (labels[i] < 0)
      fail(ErrorKind::InvalidLabel, "negative label " + std::to_string(labels[i]) + " for '" + ids[i] + "'");
    max_label = std::max(max_label, labels[i]);
  }
  LabelTable table;
  table.ids = std::move(ids);
  table.labels = std::move(labels);
  table.num_classes = std::max(2, max_label + 1);
  if (num_classes) {
    require(*num_classes >= table.num_classes && *num_classes >= 2, ErrorKind::InvalidLabel,
            "class count override " + std::to_string(*num_classes) + " below observed " +
                std::to_string(max_label + 1));
    table.num_classes = *num_classes;
  }
  return table;
}

LabelTable parse_labels(const std::string& text, std::optional<int> num_classes) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> ids;
  Labels labels;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "id\tlabel")
        fail(ErrorKind::Parse, "line 1: expected header 'id<TAB>label'");
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected two tab-separated fields");
    std::string id = line.substr(0, tab);
    const std::string field = line.substr(tab + 1);
    require(!id.empty(), ErrorKind::Parse, "line " + std::to_string(line_no) + ": empty id");
    long long value = 0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty())
      fail(ErrorKind::InvalidLabel,
           "line " + std::to_string(line_no) + ": label '" + field + "' is not an integer");
    if (value < 0)
      fail(ErrorKind::InvalidLabel, "line " + std::to_string(line_no) + ": negative label " + field);
    require(value <= 1'000'000, ErrorKind::InvalidLabel,
            "line " + std::to_string(line_no) + ": label " + field + " out of range");
    ids.push_back(std::move(id));
    labels.push_back(static_cast<int>(value));
  }
  require(header_seen, ErrorKind::Parse, "empty label file");
  return make_label_table(std::move(ids), std::move(labels), num_classes);
}

LabelTable load_labels(const std::filesystem::path& path, std::optional<int> num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_labels(buffer.str(), num_classes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_labels(const std::filesystem::path& path, const LabelTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "id\tlabel\n";
  for (std::size_t i = 0; i < table.size(); ++i) out << table.ids[i] << '\t' << table.labels[i] << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

LabeledDataset align(std::vector<EmbeddingSet> sources, const LabelTable& labels) {
  const std::size_t m = labels.size();
  std::unordered_map<std::string, std::size_t> label_row;
  label_row.reserve(m);
  for (std::size_t i = 0; i < m; ++i) label_row.emplace(labels.ids[i], i);

  std::unordered_set<std::string> seen_sources;
  LabeledDataset out;
  out.labels = labels;
  for (auto& src : sources) {
    src.validate();
    if (!seen_sources.insert(src.source_id).second)
      fail(ErrorKind::DuplicateId, "source '" + src.source_id + "' given twice");

    if (src.positional()) {
      if (src.size() < m)
        fail(ErrorKind::MissingSample, "source '" + src.source_id + "' has " + std::to_string(src.size()) +
                                           " rows, missing sample '" + labels.ids[src.size()] + "'");
      if (src.size() > m)
        fail(ErrorKind::ExtraSample, "source '" + src.source_id + "' has " + std::to_string(src.size()) +
                                         " rows for " + std::to_string(m) + " labels");
      src.sample_ids = labels.ids;
      out.sources.push_back(std::move(src));
      continue;
    }

    std::vector<std::ptrdiff_t> row_of_label(m, -1);
    for (std::size_t r = 0; r < src.size(); ++r) {
      auto it = label_row.find(src.sample_ids[r]);
      if (it == label_row.end())
        fail(ErrorKind::ExtraSample,
             "source '" + src.source_id + "' has sample '" + src.sample_ids[r] + "' with no label");
      row_of_label[it->second] = static_cast<std::ptrdiff_t>(r);
    }
    EmbeddingSet aligned;
    aligned.source_id = src.source_id;
    aligned.vectors.resize(static_cast<Eigen::Index>(m), src.vectors.cols());
    for (std::size_t i = 0; i < m; ++i) {
      if (row_of_label[i] < 0)
        fail(ErrorKind::MissingSample, "source '" + src.source_id + "' lacks sample '" + labels.ids[i] + "'");
      aligned.vectors.row(static_cast<Eigen::Index>(i)) = src.vectors.row(row_of_label[i]);
    }
    aligned.sample_ids = labels.ids;
    out.sources.push_back(std::move(aligned));
  }
  return out;
}

std::string fraction_tag(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", fraction);
  return buf;
}

std::vector<SplitPlan> make_splits(std::size_t m, std::span<const double> fractions, std::uint64_t seed) {
  require(m >= 2, ErrorKind::InvalidArgument, "need at least 2 samples to split, got " + std::to_string(m));
  std::vector<SplitPlan> plans;
  for (double fraction : fractions) {
    require(fraction > 0.0 && fraction < 1.0, ErrorKind::InvalidArgument,
            "split fraction " + fraction_tag(fraction) + " outside (0,1)");
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
    require(n_test >= 1 && n_test < m, ErrorKind::EmptySplit,
            "fraction " + fraction_tag(fraction) + " of " + std::to_string(m) +
                " samples leaves an empty train or test set");

    SplitPlan plan;
    plan.seed = derive_seed(seed, "split|" + fraction_tag(fraction));
    plan.test_fraction = fraction;
    Indices perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(plan.seed);
    rng.shuffle(std::span<std::size_t>(perm));
    plan.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
    plan.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

Matrix gather_rows(const MatrixF& data, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
  return out;
}

Labels gather_labels(const Labels& labels, std::span<const std::size_t> rows) {
  Labels out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels.at(r));
  return out;
}

} // namespace kgens
