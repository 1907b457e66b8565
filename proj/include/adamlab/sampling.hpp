#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace adamlab {

/// SplitMix64. Fixed state transition so index streams are bit-identical
/// across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on {0, ..., bound-1} by rejection; bound must be >= 1.
  std::uint64_t bounded(std::uint64_t bound) {
    // Reject the low 2^64 mod bound values so the accepted range is a
    // multiple of bound.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

enum class SamplingKind { WithReplacement, RandomShuffle, Cyclic };

std::string_view sampling_name(SamplingKind kind);
SamplingKind parse_sampling(std::string_view name);

struct SamplingScheme {
  SamplingKind kind = SamplingKind::WithReplacement;
  std::uint64_t seed = 0;  // ignored for Cyclic
};

/// Emits batch indices tau_k. RandomShuffle draws a Fisher-Yates permutation
/// at every epoch boundary and consumes it in order.
class IndexSampler {
 public:
  IndexSampler(SamplingScheme scheme, std::size_t n);

  std::size_t next();

  /// Starts a fresh epoch: discards the rest of the current permutation.
  void begin_epoch();

  std::size_t n() const { return n_; }
  std::uint64_t calls() const { return calls_; }
  const SamplingScheme& scheme() const { return scheme_; }

 private:
  void reshuffle();

  SamplingScheme scheme_;
  std::size_t n_;
  SplitMix64 rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
  std::uint64_t calls_ = 0;
};

}  // namespace adamlab
