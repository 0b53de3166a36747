#pragma once

#include <cmath>
#include <cstdint>

namespace sgdct {

// splitmix64 finalizer. Full-avalanche 64-bit hash.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Counter-based substream derivation: the seed of stream `stream` depends only
// on (master, stream), never on how many streams exist or who runs them.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  return mix64((master + kGolden) ^ mix64(stream * kGolden + 0x2545f4914f6cdd1dULL));
}

// Stream salts for non-path consumers (kept far above any plausible path index).
constexpr std::uint64_t kComparisonSampleStream = 0xffff000000000001ULL;

// splitmix64 sequence generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Deterministic standard-normal stream (Box-Muller over splitmix64 uniforms).
// Not tied to std::normal_distribution so that output is identical across
// standard libraries and platforms.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : bits_(seed) {}

  // Uniform on (0, 1].
  double uniform() {
    return static_cast<double>((bits_.next() >> 11) + 1) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * 3.14159265358979323846 * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  SplitMix64 bits_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sgdct
