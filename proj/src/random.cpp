#include "gfx/random.hpp"

#include <cmath>
#include <numbers>

namespace gfx {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint64_t, 2> block_at(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t block) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto r = philox4x32(ctr, key);
  return {(static_cast<std::uint64_t>(r[1]) << 32) | r[0],
          (static_cast<std::uint64_t>(r[3]) << 32) | r[2]};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RandomStream::result_type RandomStream::operator()() noexcept {
  const std::uint64_t block = position_ >> 1;
  if (block != block_index_) {
    block_ = block_at(seed_, stream_, block);
    block_index_ = block;
  }
  return block_[position_++ & 1];
}

RandomStream::result_type RandomStream::at(std::uint64_t index) const noexcept {
  return block_at(seed_, stream_, index >> 1)[index & 1];
}

double RandomStream::exponential(double rate) noexcept {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(uniform()) / rate;
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double RandomStream::normal_at(std::uint64_t index) const noexcept {
  const auto b = block_at(seed_, stream_, index);
  const double u1 = to_open_unit(b[0]);
  const double u2 = to_open_unit(b[1]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gfx
