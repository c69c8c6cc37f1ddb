#ifndef POLLNET_RNG_HPP
#define POLLNET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace pollnet {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Seedable 64-bit stream. Sampling is done by explicit inversion / rejection
/// on raw generator words so that runs are bit-reproducible for a given seed,
/// independent of the standard library's distribution implementations.
/// Independent sub-streams are derived from (seed, path...) word mixing.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = seed;
    for (std::uint64_t w : path) {
      s ^= w + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
      detail::splitmix64(s);
    }
    return RngStream(detail::splitmix64(s));
  }

  std::uint64_t next() { return gen_(); }

  /// Uniform on (0, 1]; never returns 0 so -log(u) is finite.
  double uniform01() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Marsaglia-Tsang; boosted to shape >= 1 via the U^(1/a) factor.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double z, w;
      do {
        z = normal();
        w = 1.0 + c * z;
      } while (w <= 0.0);
      w = w * w * w;
      const double u = uniform01();
      if (std::log(u) < 0.5 * z * z + d - d * w + d * std::log(w)) return d * w / rate;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pollnet

#endif
