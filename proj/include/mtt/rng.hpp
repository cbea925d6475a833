#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mtt {

/// Philox4x32-10 counter-based generator.
///
/// A stream is addressed by (seed, stream id). The seed is the 64-bit key and
/// the stream id occupies the upper half of the 128-bit counter, so distinct
/// streams never share a block and results do not depend on which worker
/// thread consumes which stream.
class Rng {
 public:
  using result_type = std::uint32_t;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Rng(std::uint64_t seed, std::uint64_t stream);

  result_type operator()();

  /// Independent child stream; does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t tag) const;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal draw (Marsaglia polar method, second variate cached).
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int index_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64-style mixing of a parent stream id with a child tag.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t tag);

}  // namespace mtt
