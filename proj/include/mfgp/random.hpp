#pragma once

#include <cstdint>
#include <random>

namespace mfgp {

/// SplitMix64 finalizer, used to derive independent engine seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Reproducible random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits of each draw; normals use the
/// Box-Muller transform (std::normal_distribution is implementation-defined
/// and is deliberately avoided). Distinct `stream` ids give statistically
/// independent sequences for the same seed.
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
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mfgp
