#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sstlab/numeric.hpp"
#include "sstlab/rates.hpp"

namespace sstlab {

struct TailOptions {
  double rel_tol = 1e-15;
  int consecutive = 10;
  std::int64_t max_terms = 1000000;
};

// Log-weights on the integer range [lo, hi] plus the total mass lying
// beyond each end. Unnormalized; normalized quantities subtract log_total().
class MassTable {
 public:
  MassTable() = default;
  MassTable(std::int64_t lo, std::vector<Real> log_weights,
            Real log_left_tail, Real log_right_tail);

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(w_.size()) - 1; }
  bool contains(std::int64_t n) const { return n >= lo() && n <= hi(); }

  Real log_weight(std::int64_t n) const;  // throws kWindowExceeded
  Real log_left_tail() const { return left_tail_; }
  Real log_right_tail() const { return right_tail_; }
  Real log_total() const { return total_; }

  // Mass of [p, q]; p may be kMinusInfinity and q kPlusInfinity. Finite
  // endpoints must lie in the table.
  Real log_mass(std::int64_t p, std::int64_t q) const;
  Real log_mass_to(std::int64_t q) const { return log_mass(kMinusInfinity, q); }
  Real log_mass_from(std::int64_t p) const { return log_mass(p, kPlusInfinity); }

  const std::vector<Real>& log_weights() const { return w_; }

 private:
  std::int64_t lo_ = 0;
  std::vector<Real> w_;
  std::vector<Real> cum_left_;   // log mass of (-inf, lo+i]
  std::vector<Real> cum_right_;  // log mass of [lo+i, +inf)
  Real left_tail_ = kLogZero, right_tail_ = kLogZero, total_ = kLogZero;
};

// Sums exp(log_w(n)) over n = 1, 2, ... by adaptive truncation. Throws
// kNonSummableTail when the cap is reached without convergence.
Real log_tail_sum(const std::function<Real(std::int64_t)>& log_w,
                  const TailOptions& opts = {});

// Stationary measure of a birth-death chain, unnormalized with mu(0) = 1
// (or mu(lo) = 1 when 0 is outside the support), tabulated on
// [-extent, extent] clipped to the support. Table families must cover
// the requested window.
MassTable mu_bd(const BDRates& rates, std::int64_t window_lo,
                std::int64_t window_hi, const TailOptions& opts = {});

}  // namespace sstlab
