#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "sstlab/numeric.hpp"

namespace sstlab {

enum class SeriesVerdict { kConverges, kDiverges, kInconclusive };
const char* verdict_name(SeriesVerdict v);

struct SeriesOptions {
  std::int64_t max_terms = 10000;
  double rel_tol = 1e-15;      // increment / partial sum
  int consecutive = 10;        // consecutive small increments to stop
  double ratio_lo = 0.999;     // ratio test window for Inconclusive
  double ratio_hi = 1.001;
  double nondecay_fraction = 0.1;  // last >= fraction * max means terms do not vanish
};

struct SeriesEvidence {
  SeriesVerdict verdict = SeriesVerdict::kInconclusive;
  std::int64_t terms = 0;
  Real log_partial_sum = kLogZero;
  Real log_last_term = kLogZero;
  double last_ratio = 0;      // term_N / term_{N-1}
  double tail_estimate = 0;   // geometric tail estimate when converging by ratio
  std::string reason;

  double partial_sum() const { return static_cast<double>(std::exp(log_partial_sum)); }
  double last_term() const { return static_cast<double>(std::exp(log_last_term)); }
};

// Classifies sum_{n >= 1} exp(log_term(n)); log_term is called with n = 1,
// 2, ... in order so callers may keep running state.
SeriesEvidence classify_series(const std::function<Real(std::int64_t)>& log_term,
                               const SeriesOptions& opts = {});

}  // namespace sstlab
