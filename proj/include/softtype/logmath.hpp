#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace softtype {

// log(1 - exp(x)) for x <= 0. Switches between the two forms at -ln 2,
// where each is accurate.
inline double log1mexp(double x) {
  if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

// log(exp(a) + exp(b)), exact for infinite arguments.
inline double logAddExp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace softtype
