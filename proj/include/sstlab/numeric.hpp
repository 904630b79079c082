#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace sstlab {

// Extended precision for log-space measures and rates. Rates of order 2^40
// need more than 53 bits in their logarithms to keep the duality identities
// at the 1e-9 level.
using Real = long double;

inline constexpr Real kLogZero = -std::numeric_limits<Real>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline Real log_add(Real a, Real b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// log(e^a - e^b), requires a >= b. Returns kLogZero when equal.
inline Real log_sub(Real a, Real b) {
  if (b == kLogZero) return a;
  if (b >= a) return kLogZero;
  Real d = b - a;
  // log(1 - e^d): two branches for accuracy near 0 and far below.
  if (d > -0.6931471805599453L) return a + std::log(-std::expm1(d));
  return a + std::log1p(-std::exp(d));
}

inline Real log_sum(std::span<const Real> xs) {
  Real m = kLogZero;
  for (Real x : xs) m = std::max(m, x);
  if (m == kLogZero) return kLogZero;
  Real s = 0;
  for (Real x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace sstlab
