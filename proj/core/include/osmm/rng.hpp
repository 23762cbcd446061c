#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace osmm {

/// SplitMix64 step; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Portable seeded generator. The engine is std::mt19937_64 (its output
/// sequence is fixed by the C++ standard); it is seeded with SplitMix64 of
/// (seed, stream) so distinct streams are decorrelated. Uniforms take the top
/// 53 bits; normals use Box-Muller, returning the cosine branch first and the
/// sine branch on the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace osmm
