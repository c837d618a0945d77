#pragma once

#include <cstdint>
#include <random>

namespace cscensor {

/// Stream key reserved for the signal draw of a trial; sensor nodes use their
/// own 0-based index as the node key.
inline constexpr std::uint64_t kSignalStream = ~std::uint64_t{0};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the (master, trial, node) substream. Each component is folded
/// through the mixer so neighbouring keys give unrelated engines, and a
/// trial's draws never depend on which other trials ran before it.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t trial,
                                       std::uint64_t node) noexcept {
  return mix64(mix64(mix64(master) ^ trial) ^ node);
}

/// Random stream used by every sampling routine.
///
/// The engine is a 64-bit Mersenne twister; Gaussian variates come from
/// std::normal_distribution (Marsaglia polar method in libstdc++). Draws are
/// bit-reproducible for a fixed seed on a fixed standard library.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master, std::uint64_t trial, std::uint64_t node) {
    return Rng(substream_seed(master, trial, node));
  }

  double gaussian(double stddev = 1.0) { return stddev * normal_(engine_); }

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cscensor
