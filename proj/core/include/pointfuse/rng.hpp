#pragma once

#include <cmath>
#include <cstdint>

namespace pointfuse {

/// Counter-based pseudo-random generator (SplitMix64, Steele et al. 2014).
///
/// The i-th output is a pure function of the seed:
///   out_i = finalize(seed + (i+1) * 0x9E3779B97F4A7C15)
/// so streams are reproducible across platforms, runs, and call sites.
/// All distribution mappings below are pinned to the exact formulas in
/// this header; none delegate to <random>, whose distributions are
/// implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Multiply-high mapping; requires n > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (two uniforms per call, no caching).
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from (seed, index), e.g. one stream
/// per RANSAC iteration. Pinned formula: two SplitMix64 finalizations.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 a(seed);
  SplitMix64 b(a.next() ^ (index + 0x6A09E667F3BCC909ull));
  return b.next();
}

}  // namespace pointfuse
