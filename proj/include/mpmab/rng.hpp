#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mpmab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A (seed, stream) pair selects an independent substream; draws advance a
/// 64-bit block counter.  Each 128-bit block yields two 64-bit outputs.  The
/// type satisfies UniformRandomBitGenerator so it can feed <random>
/// distributions, but the simulation code uses uniform01() directly so that
/// draws are bit-reproducible across standard library implementations.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() : Philox4x32(0, 0) {}
  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double on [lo, hi), computed as lo + (hi - lo) * u.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Skips `blocks` 128-bit blocks ahead.
  void discard_blocks(std::uint64_t blocks);

  /// The raw ten-round bijection, exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

 private:
  void refill();

  Key key_{};
  Block counter_{};
  Block buffer_{};
  int next_ = 4;
};

/// Stream tags used by the harness; the low 32 bits carry an index (player).
enum class StreamTag : std::uint32_t {
  kInstance = 1,
  kReward = 2,
  kPolicy = 3,
  kTest = 0xffff,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint32_t index = 0) {
  return (static_cast<std::uint64_t>(tag) << 32) | index;
}

}  // namespace mpmab
