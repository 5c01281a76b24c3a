#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace kgens {

/// Name recorded in report provenance. Bump the suffix whenever any derivation
/// below changes, since old reports would no longer regenerate.
inline constexpr std::string_view kPrngName = "mt19937_64/kgens-v1";

/// Deterministic generator. The engine (mt19937_64) is fully specified by the
/// standard; the std distributions are not, so every draw is derived here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), rejection-sampled (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; no cached second value.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates.
  template <class T> void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

/// Stable 64-bit FNV-1a hash.
std::uint64_t stable_hash(std::string_view text);

/// Mixes a base seed with a tag into an independent stream seed
/// (FNV-1a of the tag, xor, splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

} // namespace kgens
