#pragma once

#include <cstdint>
#include <random>

namespace cflow {

/// Deterministic uniform sampler.
///
/// std::uniform_real_distribution is implementation-defined, so reports seeded
/// with the same value could differ across standard libraries. Drawing the top
/// 53 bits of the engine output keeps sample streams bit-identical everywhere.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return eng_() % n; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cflow
