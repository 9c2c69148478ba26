#ifndef NETRECON_SPECIAL_HPP
#define NETRECON_SPECIAL_HPP

#include <cmath>
#include <limits>

namespace netrecon {

// Digamma via upward recurrence below 6 and the Bernoulli asymptotic series
// above. Absolute accuracy target: 1e-12 for x > 0.
inline double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // ln x - 1/(2x) - sum B_{2n} / (2n x^{2n}), truncated after x^-14
  double series = inv2 * (1.0 / 12.0 -
                  inv2 * (1.0 / 120.0 -
                  inv2 * (1.0 / 252.0 -
                  inv2 * (1.0 / 240.0 -
                  inv2 * (1.0 / 132.0 -
                  inv2 * (691.0 / 32760.0 -
                  inv2 * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

inline double log_gamma(double x) { return std::lgamma(x); }

// x*log(x) with the limit value at 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace netrecon

#endif
