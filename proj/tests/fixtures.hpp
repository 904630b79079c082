#pragma once

#include <cmath>
#include <vector>

#include "sstlab/graph_model.hpp"
#include "sstlab/rates.hpp"

namespace sstlab::testing {

// b_n = a_n = 2^|n|, mu(n) proportional to 2^-|n|.
inline BDRates f1() {
  return BDRates::symmetric(HalfLineRates::exponential(2), BDRates::Family::kExponential);
}

// b_n = 1, a_n = 2 for n >= 1, mirrored; mu(n) proportional to 2^-|n|.
inline BDRates f2() {
  return BDRates::symmetric(HalfLineRates::geometric(1, 2), BDRates::Family::kGeometric);
}

// Closed-form stationary law shared by F1 and F2: 2^-|n| / 3.
inline double mu_f(std::int64_t n) { return std::ldexp(1.0, -static_cast<int>(std::llabs(n))) / 3; }

// Center "c" with one ray per entry of `rays`, unit attach rates.
inline RawGraph star(const std::vector<HalfLineRates>& rays) {
  RawGraph g;
  g.names = {"c"};
  for (const HalfLineRates& r : rays) g.rays.push_back({0, 1.0, 1.0, r});
  return g;
}

inline GraphModel star_f1() {
  const HalfLineRates e = HalfLineRates::exponential(2);
  return compute_center(star({e, e, e}));
}

inline GraphModel star_mixed() {
  const HalfLineRates e = HalfLineRates::exponential(2);
  return compute_center(star({e, HalfLineRates::geometric(1, 2), e}));
}

}  // namespace sstlab::testing
