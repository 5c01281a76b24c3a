#include "helpers.hpp"

#include "kgens/dataset_io.hpp"
#include "kgens/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

using namespace kgens;

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

EmbeddingSet with_ids(std::string id, MatrixF v, std::vector<std::string> ids) {
  EmbeddingSet s;
  s.source_id = std::move(id);
  s.vectors = std::move(v);
  s.sample_ids = std::move(ids);
  return s;
}

} // namespace

TEST_SUITE("dataset_io") {

TEST_CASE("EMB round-trip of a 2x3 matrix") {
  test::TempDir dir("emb");
  MatrixF v(2, 3);
  v << 1, 0, 0, 0, 1, 0;
  EmbeddingSet set;
  set.vectors = v;
  write_embeddings(dir / "m.emb", set);
  const auto loaded = load_embeddings(dir / "m.emb");
  CHECK(loaded.size() == 2);
  CHECK(loaded.dim() == 3);
  CHECK(loaded.source_id == "m");
  CHECK(loaded.vectors == v);
  CHECK(loaded.positional());
}

TEST_CASE("EMB header layout is little-endian and 20 bytes") {
  MatrixF v(2, 3);
  v << 1.5f, -2, 0, 0, 1, 0;
  const auto bytes = encode_embeddings(v);
  REQUIRE(bytes.size() == 20 + 2 * 3 * 4);
  CHECK(std::memcmp(bytes.data(), "EMBV", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 0);
  CHECK(bytes[8] == 2);
  for (int i = 9; i < 16; ++i) CHECK(bytes[i] == 0);
  CHECK(bytes[16] == 3);
  // 1.5f = 0x3FC00000
  CHECK(bytes[20] == 0x00);
  CHECK(bytes[22] == 0xC0);
  CHECK(bytes[23] == 0x3F);
}

TEST_CASE("EMB write(load(f)) is byte-identical") {
  test::TempDir dir("emb");
  const Matrix m = test::random_matrix(17, 5, 1);
  EmbeddingSet set;
  set.vectors = m.cast<float>();
  write_embeddings(dir / "a.emb", set);
  write_embeddings(dir / "b.emb", load_embeddings(dir / "a.emb"));
  CHECK(read_bytes(dir / "a.emb") == read_bytes(dir / "b.emb"));
}

TEST_CASE("EMB decode errors") {
  MatrixF v(5, 2);
  v.setOnes();
  const auto good = encode_embeddings(v);

  SUBCASE("bad magic") {
    auto b = good;
    std::memcpy(b.data(), "XXXX", 4);
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::BadMagic);
  }
  SUBCASE("bad version") {
    auto b = good;
    b[4] = 2;
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::UnsupportedVersion);
  }
  SUBCASE("bad dtype") {
    auto b = good;
    b[5] = 1;
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::UnsupportedDtype);
  }
  SUBCASE("n=5 declared but 4 rows present") {
    auto b = good;
    b.resize(b.size() - 2 * 4);
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::Truncated);
  }
  SUBCASE("short header") {
    std::vector<std::uint8_t> b(good.begin(), good.begin() + 10);
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::Truncated);
  }
  SUBCASE("hostile row count does not overflow") {
    auto b = good;
    for (int i = 8; i < 16; ++i) b[i] = 0xFF;
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::Truncated);
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(0);
    CHECK(kind_of([&] { decode_embeddings(b); }) == ErrorKind::Parse);
  }
  SUBCASE("non-finite value reports row and column") {
    MatrixF bad = v;
    bad(3, 1) = std::numeric_limits<float>::quiet_NaN();
    const auto b = encode_embeddings(bad);
    try {
      decode_embeddings(b);
      FAIL("expected NonFinite");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonFinite);
      const std::string msg = e.what();
      CHECK(msg.find("row 3") != std::string::npos);
      CHECK(msg.find("column 1") != std::string::npos);
    }
    CHECK(std::isnan(decode_embeddings(b, false)(3, 1)));
  }
}

TEST_CASE("load_embeddings on a missing file is an I/O error") {
  CHECK(kind_of([] { load_embeddings("/nonexistent/dir/x.emb"); }) == ErrorKind::Io);
}

TEST_CASE("load_embeddings on a truncated file names the problem") {
  test::TempDir dir("trunc");
  auto bytes = encode_embeddings(MatrixF::Ones(4, 3));
  bytes.resize(bytes.size() - 5);
  write_bytes(dir / "cut.emb", bytes);
  CHECK(kind_of([&] { load_embeddings(dir / "cut.emb"); }) == ErrorKind::Truncated);
}

TEST_CASE("labels: c inferred as max + 1") {
  const auto t = parse_labels("id\tlabel\na\t0\nb\t1\nc\t1\n");
  CHECK(t.size() == 3);
  CHECK(t.num_classes == 2);
  CHECK(parse_labels("id\tlabel\na\t0\nb\t2\n").num_classes == 3);
  CHECK(parse_labels("id\tlabel\na\t0\nb\t0\n").num_classes == 2);
  CHECK(parse_labels("id\tlabel\na\t0\n", 4).num_classes == 4);
}

TEST_CASE("labels: CRLF and trailing blank lines are accepted") {
  const auto t = parse_labels("id\tlabel\r\na\t1\r\nb\t0\r\n\r\n");
  CHECK(t.ids == std::vector<std::string>{"a", "b"});
  CHECK(t.labels == Labels{1, 0});
}

TEST_CASE("labels: errors") {
  CHECK(kind_of([] { parse_labels("id\tlabel\na\t0\na\t1\n"); }) == ErrorKind::DuplicateId);
  CHECK(kind_of([] { parse_labels("id\tlabel\na\tx\n"); }) == ErrorKind::InvalidLabel);
  CHECK(kind_of([] { parse_labels("id\tlabel\na\t1.5\n"); }) == ErrorKind::InvalidLabel);
  CHECK(kind_of([] { parse_labels("id\tlabel\na\t-1\n"); }) == ErrorKind::InvalidLabel);
  CHECK(kind_of([] { parse_labels("sample\ty\na\t1\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_labels("id\tlabel\na\t1\t2\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_labels(""); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_labels("id\tlabel\na\t3\n", 2); }) == ErrorKind::InvalidLabel);
}

TEST_CASE("labels file round-trip") {
  test::TempDir dir("labels");
  const auto t = make_label_table({"x", "y", "z"}, {2, 0, 1});
  write_labels(dir / "l.tsv", t);
  const auto back = load_labels(dir / "l.tsv");
  CHECK(back.ids == t.ids);
  CHECK(back.labels == t.labels);
  CHECK(back.num_classes == 3);
}

TEST_CASE("align reorders id-keyed sources to label order") {
  MatrixF a(2, 1), b(2, 1);
  a << 10, 20;  // ids a, b
  b << 2, 1;    // ids b, a
  const auto labels = make_label_table({"a", "b"}, {0, 1});
  const auto d = align({with_ids("s1", a, {"a", "b"}), with_ids("s2", b, {"b", "a"})}, labels);
  CHECK(d.size() == 2);
  CHECK(d.source("s1").vectors(0, 0) == 10);
  CHECK(d.source("s2").vectors(0, 0) == 1);
  CHECK(d.source("s2").vectors(1, 0) == 2);
  CHECK(d.source("s2").sample_ids == labels.ids);
}

TEST_CASE("align never drops samples") {
  MatrixF one(1, 1);
  one << 1;
  const auto labels = make_label_table({"a", "b"}, {0, 1});
  CHECK(kind_of([&] { align({with_ids("s", one, {"a"})}, labels); }) == ErrorKind::MissingSample);
  MatrixF three(3, 1);
  three << 1, 2, 3;
  CHECK(kind_of([&] { align({with_ids("s", three, {"a", "b", "c"})}, labels); }) == ErrorKind::ExtraSample);
  EmbeddingSet positional;
  positional.source_id = "p";
  positional.vectors = one;
  CHECK(kind_of([&] { align({positional}, labels); }) == ErrorKind::MissingSample);
  positional.vectors = three;
  CHECK(kind_of([&] { align({positional}, labels); }) == ErrorKind::ExtraSample);
}

TEST_CASE("align identity and idempotence") {
  MatrixF v(3, 2);
  v << 1, 2, 3, 4, 5, 6;
  const auto labels = make_label_table({"a", "b", "c"}, {0, 1, 0});
  EmbeddingSet positional;
  positional.source_id = "p";
  positional.vectors = v;
  const auto once = align({positional}, labels);
  CHECK(once.size() == 3);
  CHECK(once.source("p").vectors == v);
  const auto twice = align(once.sources, once.labels);
  CHECK(twice.source("p").vectors == once.source("p").vectors);
  CHECK(twice.source("p").sample_ids == once.source("p").sample_ids);
  CHECK(twice.labels.labels == once.labels.labels);
}

TEST_CASE("align rejects duplicate source ids and unknown lookups") {
  MatrixF v(1, 1);
  v << 1;
  const auto labels = make_label_table({"a"}, {0});
  EmbeddingSet s;
  s.source_id = "p";
  s.vectors = v;
  CHECK(kind_of([&] { align({s, s}, labels); }) == ErrorKind::DuplicateId);
  const auto d = align({s}, labels);
  CHECK(kind_of([&] { d.source("nope"); }) == ErrorKind::UnknownSource);
}

TEST_CASE("make_splits sizes") {
  const std::vector<double> one{0.2};
  const auto p = make_splits(10, one, 42);
  REQUIRE(p.size() == 1);
  CHECK(p[0].test.size() == 2);
  CHECK(p[0].train.size() == 8);

  const std::vector<double> five{0.10, 0.15, 0.20, 0.25, 0.30};
  const auto plans = make_splits(100, five, 42);
  REQUIRE(plans.size() == 5);
  const std::size_t expected[] = {10, 15, 20, 25, 30};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(plans[i].test.size() == expected[i]);
    CHECK(plans[i].train.size() == 100 - expected[i]);
  }
}

TEST_CASE("make_splits is deterministic and seed-sensitive") {
  const std::vector<double> five{0.10, 0.15, 0.20, 0.25, 0.30};
  const auto a = make_splits(100, five, 42);
  const auto b = make_splits(100, five, 42);
  const auto c = make_splits(100, five, 43);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a[i].train == b[i].train);
    CHECK(a[i].test == b[i].test);
    CHECK(a[i].seed == b[i].seed);
  }
  CHECK(a[0].test != c[0].test);
  // independent shuffles per fraction
  CHECK(!std::equal(a[0].test.begin(), a[0].test.end(), a[1].test.begin()));
}

TEST_CASE("make_splits property sweep: partition with no duplicates") {
  for (std::size_t m = 2; m <= 200; ++m) {
    for (double f : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      const auto n_test = static_cast<std::size_t>(std::llround(f * static_cast<double>(m)));
      const std::vector<double> fr{f};
      if (n_test == 0 || n_test == m) {
        CHECK_THROWS_AS(make_splits(m, fr, 42), Error);
        continue;
      }
      const auto p = make_splits(m, fr, 42).front();
      REQUIRE(p.test.size() == n_test);
      std::vector<std::size_t> all = p.train;
      all.insert(all.end(), p.test.begin(), p.test.end());
      std::sort(all.begin(), all.end());
      bool ok = all.size() == m;
      for (std::size_t i = 0; ok && i < m; ++i) ok = all[i] == i;
      REQUIRE(ok);
    }
  }
}

TEST_CASE("make_splits argument errors") {
  const std::vector<double> bad{1.0};
  CHECK(kind_of([&] { make_splits(10, bad, 42); }) == ErrorKind::InvalidArgument);
  const std::vector<double> fine{0.5};
  CHECK(kind_of([&] { make_splits(1, fine, 42); }) == ErrorKind::InvalidArgument);
  const std::vector<double> tiny{0.01};
  CHECK(kind_of([&] { make_splits(10, tiny, 42); }) == ErrorKind::EmptySplit);
}

TEST_CASE("fraction_tag is canonical") {
  CHECK(fraction_tag(0.1) == "0.1");
  CHECK(fraction_tag(0.15) == "0.15");
  CHECK(fraction_tag(0.30) == "0.3");
}

}
