#include "vsr/rng.hpp"

#include <cmath>
#include <numbers>

namespace vsr {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64(s);
}

SeedHasher::SeedHasher(std::uint64_t seed) noexcept : h_(mix64(seed ^ 0x6A09E667F3BCC908ULL)) {}

SeedHasher& SeedHasher::add(std::uint64_t v) noexcept {
  h_ = mix64(h_ ^ mix64(v));
  return *this;
}

SeedHasher& SeedHasher::add(std::string_view s) noexcept {
  // FNV-1a over the bytes, then folded in with the length so that
  // ("ab","c") and ("a","bc") differ.
  std::uint64_t f = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    f ^= c;
    f *= 0x100000001B3ULL;
  }
  add(f);
  return add(static_cast<std::uint64_t>(s.size()));
}

SeedHasher& SeedHasher::add(std::span<const std::int64_t> values) noexcept {
  for (auto v : values) add(static_cast<std::uint64_t>(v));
  return add(static_cast<std::uint64_t>(values.size()));
}

std::uint64_t SeedHasher::digest() const noexcept { return mix64(h_); }

std::uint64_t derive_sample_seed(std::uint64_t run_seed, std::string_view question_id,
                                 std::uint64_t sample_index) noexcept {
  return SeedHasher(run_seed).add(question_id).add(sample_index).digest();
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
}

std::uint64_t Xoshiro256::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::bounded(std::uint64_t bound) noexcept {
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Xoshiro256::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256::normal() noexcept {
  // 1 - uniform() is in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace vsr
