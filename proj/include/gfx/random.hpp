#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace gfx {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure: the same (counter, key) always yields the same block.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive combination of identifiers into one stream id.
constexpr std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Counter-based random stream keyed by (seed, stream id).
///
/// Draw i of a stream is a pure function of (seed, stream, i), so results do
/// not depend on scheduling or thread count. Satisfies
/// UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Random access: 64 bits at absolute position `index` (does not move the cursor).
  result_type at(std::uint64_t index) const noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept { return to_open_unit((*this)()); }
  /// Exponential with the given rate; +inf when rate == 0.
  double exponential(double rate) noexcept;
  /// Standard normal (Box-Muller, second variate cached).
  double normal() noexcept;
  /// Standard normal at absolute position `index` (random access, no caching).
  double normal_at(std::uint64_t index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return position_; }

  static double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> block_{};
  std::uint64_t block_index_ = std::numeric_limits<std::uint64_t>::max();
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gfx
