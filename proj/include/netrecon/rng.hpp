#ifndef NETRECON_RNG_HPP
#define NETRECON_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

// Seeded sampling helpers. All draws go through explicit algorithms on top of
// mt19937_64 so that identical seeds give identical streams on any platform
// (std::*_distribution output is implementation-defined).

namespace netrecon {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1).
inline double rand_u01(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Counter-based uniform in [0, 1): pure function of the key, no state.
inline double hash_u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline bool rand_bernoulli(Rng& g, double p) { return rand_u01(g) < p; }

inline double rand_normal(Rng& g) {
  // Box-Muller, one value per call.
  double u1 = 1.0 - rand_u01(g);  // (0, 1]
  double u2 = rand_u01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

// Poisson: Knuth product method below 10, Hormann's PTRS rejection above.
inline std::uint64_t rand_poisson(Rng& g, double mu) {
  if (!(mu > 0.0)) return 0;
  if (mu < 10.0) {
    const double limit = std::exp(-mu);
    std::uint64_t k = 0;
    double p = rand_u01(g);
    while (p > limit) {
      ++k;
      p *= rand_u01(g);
    }
    return k;
  }
  const double log_mu = std::log(mu);
  const double b = 0.931 + 2.53 * std::sqrt(mu);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rand_u01(g) - 0.5;
    double v = rand_u01(g);
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        kf * log_mu - mu - std::lgamma(kf + 1.0))
      return static_cast<std::uint64_t>(kf);
  }
}

// Gamma(shape, rate) via Marsaglia-Tsang.
inline double rand_gamma(Rng& g, double shape, double rate) {
  if (shape < 1.0) {
    double u = 1.0 - rand_u01(g);
    return rand_gamma(g, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rand_normal(g);
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = 1.0 - rand_u01(g);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

}  // namespace netrecon

#endif
