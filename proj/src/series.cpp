#include "sstlab/series.hpp"

#include <cmath>

namespace sstlab {

const char* verdict_name(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::kConverges: return "Converges";
    case SeriesVerdict::kDiverges: return "Diverges";
    case SeriesVerdict::kInconclusive: return "Inconclusive";
  }
  return "?";
}

SeriesEvidence classify_series(const std::function<Real(std::int64_t)>& log_term,
                               const SeriesOptions& opts) {
  SeriesEvidence ev;
  const Real log_tol = std::log(static_cast<Real>(opts.rel_tol));
  Real prev = kLogZero, max_term = kLogZero;
  int small = 0;
  for (std::int64_t n = 1; n <= opts.max_terms; ++n) {
    const Real t = log_term(n);
    ev.terms = n;
    const bool tiny = ev.log_partial_sum != kLogZero &&
                      (t == kLogZero || t - ev.log_partial_sum < log_tol);
    ev.log_partial_sum = log_add(ev.log_partial_sum, t);
    if (n > 1 && prev != kLogZero && t != kLogZero) {
      ev.last_ratio = static_cast<double>(std::exp(t - prev));
    }
    prev = t;
    ev.log_last_term = t;
    max_term = std::max(max_term, t);
    if (tiny) {
      if (++small >= opts.consecutive) {
        ev.verdict = SeriesVerdict::kConverges;
        ev.reason = "increments below tolerance";
        if (ev.last_ratio > 0 && ev.last_ratio < 1) {
          ev.tail_estimate = ev.last_term() * ev.last_ratio / (1 - ev.last_ratio);
        }
        return ev;
      }
    } else {
      small = 0;
    }
    if (ev.log_partial_sum > 11000) {  // far beyond any double
      ev.verdict = SeriesVerdict::kDiverges;
      ev.reason = "partial sums overflow";
      return ev;
    }
  }
  const Real log_frac = std::log(static_cast<Real>(opts.nondecay_fraction));
  if (ev.log_last_term != kLogZero && ev.log_last_term >= max_term + log_frac) {
    ev.verdict = SeriesVerdict::kDiverges;
    ev.reason = "terms do not decay";
  } else if (ev.last_ratio > opts.ratio_hi) {
    ev.verdict = SeriesVerdict::kDiverges;
    ev.reason = "ratio test above window";
  } else if (ev.last_ratio > 0 && ev.last_ratio < opts.ratio_lo) {
    ev.verdict = SeriesVerdict::kConverges;
    ev.reason = "ratio test below window";
    ev.tail_estimate = ev.last_term() * ev.last_ratio / (1 - ev.last_ratio);
  } else {
    ev.verdict = SeriesVerdict::kInconclusive;
    ev.reason = "ratio test inside window";
  }
  return ev;
}

}  // namespace sstlab
