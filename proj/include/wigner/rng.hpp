#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "wigner/error.hpp"

// Deterministic random streams. Every sampler in the library draws from a
// Stream seeded by a 64-bit value, and the algorithms below are fixed so a
// (seed, call sequence) pair produces the same numbers on every platform
// with IEEE doubles:
//
//   engine    xoshiro256** seeded by four splitmix64 outputs
//   uniform   top 53 bits of the engine output, in [0, 1)
//   normal    Marsaglia polar method; the second variate of each accepted
//             pair is cached and returned by the next call
//   gamma     Marsaglia-Tsang squeeze for shape >= 1, with the
//             U^(1/a) boost for shape < 1
namespace wigner::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-trial seed: master XOR a hash of (stream, index). Independent of
// scheduling, so trials can run on any thread in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t stream = 0) noexcept {
  return master ^ splitmix64(splitmix64(index) + 0xD1B54A32D192ED03ULL * (stream + 1));
}

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      s = splitmix64(x);
      x += 0x9E3779B97F4A7C15ULL;
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4]{};
};

class Stream {
 public:
  explicit Stream(std::uint64_t seed) noexcept : engine_(seed) {}

  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1), never returns 0.
  double uniform_open() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double variance) noexcept { return std::sqrt(variance) * normal(); }

  // Gamma(shape, 1).
  double gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape))
      throw InvalidArgument("gamma shape must be positive and finite");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Chi distribution with (possibly half-integer or any positive) degrees of freedom.
  double chi(double dof) { return std::sqrt(2.0 * gamma(0.5 * dof)); }

 private:
  Xoshiro256 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wigner::rng
