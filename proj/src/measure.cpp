#include "sstlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sstlab/error.hpp"

namespace sstlab {

MassTable::MassTable(std::int64_t lo, std::vector<Real> log_weights,
                     Real log_left_tail, Real log_right_tail)
    : lo_(lo), w_(std::move(log_weights)), left_tail_(log_left_tail),
      right_tail_(log_right_tail) {
  const size_t n = w_.size();
  cum_left_.resize(n);
  cum_right_.resize(n);
  Real acc = left_tail_;
  for (size_t i = 0; i < n; ++i) {
    acc = log_add(acc, w_[i]);
    cum_left_[i] = acc;
  }
  acc = right_tail_;
  for (size_t i = n; i-- > 0;) {
    acc = log_add(acc, w_[i]);
    cum_right_[i] = acc;
  }
  total_ = n ? log_add(cum_left_[n - 1], right_tail_)
             : log_add(left_tail_, right_tail_);
}

Real MassTable::log_weight(std::int64_t n) const {
  if (!contains(n)) {
    throw Error(ErrorCode::kWindowExceeded,
                "measure queried at " + std::to_string(n) + " outside table [" +
                    std::to_string(lo()) + "," + std::to_string(hi()) + "]");
  }
  return w_[n - lo_];
}

Real MassTable::log_mass(std::int64_t p, std::int64_t q) const {
  const bool left_inf = p == kMinusInfinity;
  const bool right_inf = q == kPlusInfinity;
  if (left_inf && right_inf) return total_;
  if (!left_inf && !contains(p)) log_weight(p);
  if (!right_inf && !contains(q)) log_weight(q);
  if (!left_inf && !right_inf && p > q) return kLogZero;
  if (left_inf) return cum_left_[q - lo_];
  if (right_inf) return cum_right_[p - lo_];
  if (p == q) return w_[p - lo_];
  // Two differences of cumulative sums; keep the better conditioned one.
  const Real a = cum_left_[q - lo_];
  const Real b = p > lo_ ? cum_left_[p - 1 - lo_] : left_tail_;
  const Real c = cum_right_[p - lo_];
  const Real d = q < hi() ? cum_right_[q + 1 - lo_] : right_tail_;
  const Real gap1 = a - b, gap2 = c - d;
  if (std::max(gap1, gap2) > 1e-3L) {
    return gap1 >= gap2 ? log_sub(a, b) : log_sub(c, d);
  }
  // Mass of [p, q] is tiny relative to both sides: sum directly.
  Real m = kLogZero;
  for (std::int64_t n = p; n <= q; ++n) m = std::max(m, w_[n - lo_]);
  Real s = 0;
  for (std::int64_t n = p; n <= q; ++n) s += std::exp(w_[n - lo_] - m);
  return m + std::log(s);
}

Real log_tail_sum(const std::function<Real(std::int64_t)>& log_w,
                  const TailOptions& opts) {
  Real sum = kLogZero;
  int small = 0;
  const Real log_tol = std::log(static_cast<Real>(opts.rel_tol));
  for (std::int64_t n = 1; n <= opts.max_terms; ++n) {
    const Real t = log_w(n);
    if (sum != kLogZero && (t == kLogZero || t - sum < log_tol)) {
      if (++small >= opts.consecutive) return log_add(sum, t);
    } else {
      small = 0;
    }
    sum = log_add(sum, t);
    if (!std::isfinite(static_cast<double>(sum)) && sum != kLogZero) break;
  }
  throw Error(ErrorCode::kNonSummableTail,
              "tail sum did not converge within " +
                  std::to_string(opts.max_terms) + " terms");
}

MassTable mu_bd(const BDRates& rates, std::int64_t window_lo,
                std::int64_t window_hi, const TailOptions& opts) {
  if (window_lo > window_hi) {
    throw Error(ErrorCode::kInvalidArgument, "empty window");
  }
  if (rates.family() == BDRates::Family::kTable &&
      (window_lo < rates.lo() || window_hi > rates.hi())) {
    throw Error(ErrorCode::kWindowExceeded,
                "window exceeds the table support [" + std::to_string(rates.lo()) +
                    "," + std::to_string(rates.hi()) + "]");
  }
  const std::int64_t lo = std::max(window_lo, rates.lo());
  const std::int64_t hi = std::min(window_hi, rates.hi());
  if (lo > hi) throw Error(ErrorCode::kWindowExceeded, "window misses the support");
  const std::int64_t ref = rates.in_support(0) ? 0 : rates.lo();

  // log mu(n) relative to the reference point by walking outward.
  auto step_up = [&](std::int64_t n) {  // log mu(n+1) - log mu(n)
    return rates.log_birth(n) - rates.log_death(n + 1);
  };
  auto step_down = [&](std::int64_t n) {  // log mu(n-1) - log mu(n)
    return rates.log_death(n) - rates.log_birth(n - 1);
  };
  std::vector<Real> w(static_cast<size_t>(hi - lo + 1));
  Real cur = 0;
  std::int64_t n = ref;
  // Walk from ref to lo if ref is to the right of the window, etc.
  auto value_at = [&](std::int64_t target) {
    while (n < target) cur += step_up(n++);
    while (n > target) cur += step_down(n--);
    return cur;
  };
  if (ref <= lo) {
    w[0] = value_at(lo);
    for (std::int64_t k = lo + 1; k <= hi; ++k) w[k - lo] = value_at(k);
  } else if (ref >= hi) {
    w[hi - lo] = value_at(hi);
    for (std::int64_t k = hi - 1; k >= lo; --k) w[k - lo] = value_at(k);
  } else {
    for (std::int64_t k = ref; k <= hi; ++k) w[k - lo] = value_at(k);
    n = ref;
    cur = 0;
    for (std::int64_t k = ref - 1; k >= lo; --k) w[k - lo] = value_at(k);
  }

  // Tails beyond the window.
  Real right_tail = kLogZero, left_tail = kLogZero;
  if (hi < rates.hi()) {
    if (rates.hi() != kPlusInfinity) {
      Real acc = w[hi - lo];
      for (std::int64_t k = hi; k < rates.hi(); ++k) {
        acc += step_up(k);
        right_tail = log_add(right_tail, acc);
      }
    } else {
      std::int64_t k = hi;
      Real acc = w[hi - lo];
      right_tail = log_tail_sum(
          [&](std::int64_t) {
            acc += step_up(k++);
            return acc;
          },
          opts);
    }
  }
  if (lo > rates.lo()) {
    if (rates.lo() != kMinusInfinity) {
      Real acc = w[0];
      for (std::int64_t k = lo; k > rates.lo(); --k) {
        acc += step_down(k);
        left_tail = log_add(left_tail, acc);
      }
    } else {
      std::int64_t k = lo;
      Real acc = w[0];
      left_tail = log_tail_sum(
          [&](std::int64_t) {
            acc += step_down(k--);
            return acc;
          },
          opts);
    }
  }
  return MassTable(lo, std::move(w), left_tail, right_tail);
}

}  // namespace sstlab
