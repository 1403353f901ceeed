#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace vsr {

/// SplitMix64 step. Used for seeding and as the hash finalizer.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Stateless 64-bit mix (SplitMix64 finalizer applied to `x`).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Order-sensitive hash combiner for building derived seeds.
class SeedHasher {
 public:
  explicit SeedHasher(std::uint64_t seed = 0) noexcept;

  SeedHasher& add(std::uint64_t v) noexcept;
  SeedHasher& add(std::string_view s) noexcept;
  SeedHasher& add(std::span<const std::int64_t> values) noexcept;

  std::uint64_t digest() const noexcept;

 private:
  std::uint64_t h_;
};

/// Seed for sample `sample_index` of question `question_id` in a run.
std::uint64_t derive_sample_seed(std::uint64_t run_seed, std::string_view question_id,
                                 std::uint64_t sample_index) noexcept;

/// xoshiro256** 1.0 seeded through SplitMix64. Every derived draw below is
/// implemented here so sequences are identical on every platform and
/// standard library.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform integer in [0, bound). bound must be > 0. Lemire's
  /// multiply-shift with rejection, so the result is unbiased.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

  /// Uniform real in [0, 1) with 53 bits of precision.
  double uniform() noexcept;

  /// Standard normal via Box-Muller (no cached second value).
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace vsr
