#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace codednet {

// Independent substreams drawn from one run seed. Every random value in the
// library is a pure function of (seed, stream, counter words), so runs replay
// bit-exactly and streams can be consumed out of order or in parallel.
enum class RngStream : std::uint64_t {
  Slot = 1,         // per-slot fading states consumed by the solver loops
  Diagnostics = 2,  // common-random-number slots for dual value estimates
  Bounds = 3,       // samples behind waterfilling-derived capacity bounds
  Multistart = 4,   // SINR-mode multistart initial points
  Scratch = 9,      // tests and ad-hoc draws
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer (Stafford mix13)
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_words(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t c0, std::uint64_t c1,
                                std::uint64_t c2) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ stream * 0xff51afd7ed558ccdULL);
  h = mix64(h ^ c0 * 0xc4ceb9fe1a85ec53ULL);
  h = mix64(h ^ c1 * 0x2545f4914f6cdd1dULL);
  h = mix64(h ^ c2 * 0x9e3779b97f4a7c15ULL);
  return h;
}

inline double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace detail

// Counter-based uniform draw on [0,1): no state, no ordering constraints.
inline double counter_uniform(std::uint64_t seed, RngStream stream,
                              std::uint64_t c0, std::uint64_t c1 = 0,
                              std::uint64_t c2 = 0) {
  return detail::u64_to_unit(detail::hash_words(
      seed, static_cast<std::uint64_t>(stream), c0, c1, c2));
}

// Small sequential generator for samplers that need a variable number of
// draws (rejection sampling). Seeded from a counter key, so the overall
// scheme stays counter-based.
class SequentialRng {
 public:
  SequentialRng(std::uint64_t seed, RngStream stream, std::uint64_t c0,
                std::uint64_t c1 = 0, std::uint64_t c2 = 0)
      : state_(detail::hash_words(seed, static_cast<std::uint64_t>(stream), c0,
                                  c1, c2)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(state_);
  }

  double uniform() { return detail::u64_to_unit(next_u64()); }

  // strictly positive uniform, safe under log()
  double uniform_pos() {
    double u = uniform();
    return u > 0.0 ? u : std::numeric_limits<double>::min();
  }

  double normal() {
    // Box-Muller; one of the pair is discarded to keep the call stateless.
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  // Gamma(shape, scale) via Marsaglia-Tsang, shape > 0.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = uniform_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v * scale;
      }
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace codednet
