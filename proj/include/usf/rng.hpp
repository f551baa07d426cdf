#pragma once

#include <cstdint>
#include <cmath>

#include "usf/linalg.hpp"

namespace usf {

/// Counter-based random stream. Output i is a bijective 64-bit mix of
/// (key + i*gamma), so streams are stateless apart from the counter and any
/// stream can be reconstructed from its derivation path. Distinct paths give
/// statistically independent streams, which is what the collision kernel and
/// the cell-parallel DSMC loop rely on.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  /// Derive a stream from a base seed and up to three path coordinates
  /// (e.g. seed / step / cell).
  static RngStream from_path(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                             std::uint64_t c = 0) {
    std::uint64_t k = mix64(seed ^ 0x8f5c'28f5'c28f'5c29ULL);
    k = mix64(k ^ mix64(a + 0x1000'0000'0000'0001ULL));
    k = mix64(k ^ mix64(b + 0x2000'0000'0000'0003ULL));
    k = mix64(k ^ mix64(c + 0x3000'0000'0000'0007ULL));
    return RngStream(k);
  }

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGamma); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller, second deviate cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phi = 2.0 * kPi * uniform();
    cached_ = r * std::sin(phi);
    have_cached_ = true;
    return r * std::cos(phi);
  }

  Vec3 normal3() { return {normal(), normal(), normal()}; }

  /// Uniform integer in [0, n), unbiased (Lemire rejection).
  std::uint64_t uniform_below(std::uint64_t n) {
    // n == 0 would be a caller bug; keep the check cheap.
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (-n) % n;
      while (lo < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E37'79B9'7F4A'7C15ULL;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix64(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58'476D'1CE4'E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D0'49BB'1331'11EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace usf
