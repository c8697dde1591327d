#pragma once

#include "densemath.hpp"

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

namespace dplqr {

//! SplitMix64 finalizer; used for seeding and for deriving child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

//! Seed of the `index`-th child stream of `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept
{
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

//! xoshiro256** generator (period 2^256 - 1), state filled from the seed
//! with SplitMix64. Satisfies UniformRandomBitGenerator, but all draws used
//! by the library go through the members below so that streams are
//! identical across standard library implementations.
class Rng
{
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept
    : seed_(seed)
  {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      s = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept
  {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  std::uint64_t seed() const noexcept { return seed_; }

  //! Independent generator for child stream `index`.
  Rng child(std::uint64_t index) const noexcept { return Rng(derive_seed(seed_, index)); }

  //! Uniform on [0,1) with 53 random bits.
  double uniform01() noexcept
  {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  //! Uniform on the open interval (0,1).
  double uniform_open() noexcept
  {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  //! Standard normal by inversion of the CDF (one uniform per draw).
  double std_normal() { return normal_quantile(uniform_open()); }

  //! Unbiased integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept
  {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
  {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

//! Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n)
{
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

} // namespace dplqr
