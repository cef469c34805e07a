#pragma once

#include <cstdint>
#include <random>

namespace lyap {

/// splitmix64 finalizer. Used to split one master seed into independent
/// per-sample / per-grid-point streams.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the `index`-th child stream of `master`. The rule is fixed so that
/// results never depend on how work is distributed across threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

/// mt19937_64's output sequence is fixed by the standard, and the conversion
/// below avoids the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace lyap
