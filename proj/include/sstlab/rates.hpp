#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sstlab/numeric.hpp"

namespace sstlab {

// Jump rates along a half-line k = 0, 1, 2, ...
//   out(k), k >= 0: rate of k -> k+1 (away from the origin)
//   in(k),  k >= 1: rate of k -> k-1
// A finite prefix of explicit rates may precede the parametric part; the
// parametric part is then shifted so that it starts right after the prefix.
class HalfLineRates {
 public:
  using LogRateFn = std::function<Real(std::int64_t)>;

  // out(k) = out_scale * out_growth^k, in(k) = in_scale * in_growth^k.
  static HalfLineRates power(double out_scale, double out_growth,
                             double in_scale, double in_growth);
  // Constant rates: out = base, in = base * ratio.
  static HalfLineRates geometric(double base, double ratio);
  // out(k) = in(k) = base^k.
  static HalfLineRates exponential(double base);
  // In-process oracle; functions return natural logs of the rates.
  static HalfLineRates custom(LogRateFn log_out, LogRateFn log_in,
                              std::string label);

  // Returns rates whose first out.size() outward and in.size() inward
  // values are the given ones; requires out.size() == in.size().
  HalfLineRates with_prefix(const std::vector<double>& out,
                            const std::vector<double>& in) const;

  Real log_out(std::int64_t k) const;
  Real log_in(std::int64_t k) const;
  double out(std::int64_t k) const { return static_cast<double>(std::exp(log_out(k))); }
  double in(std::int64_t k) const { return static_cast<double>(std::exp(log_in(k))); }

  const std::string& label() const { return label_; }

 private:
  enum class Kind { kPower, kCustom };
  Kind kind_ = Kind::kPower;
  Real log_out_scale_ = 0, log_out_growth_ = 0;
  Real log_in_scale_ = 0, log_in_growth_ = 0;
  std::shared_ptr<const LogRateFn> custom_out_, custom_in_;
  std::vector<Real> prefix_out_, prefix_in_;  // logs
  std::string label_;

  Real base_log_out(std::int64_t k) const;
  Real base_log_in(std::int64_t k) const;
};

inline constexpr std::int64_t kMinusInfinity = INT64_MIN;
inline constexpr std::int64_t kPlusInfinity = INT64_MAX;

// Birth rates b_n (n -> n+1) and death rates a_n (n -> n-1) on a support
// [lo, hi] of Z where either end may be infinite.
//
// Line layout: the right half-line gives b_n = right.out(n) for n >= 0 and
// a_n = right.in(n) for n >= 1; the left half-line gives a_{-n} =
// left.out(n) for n >= 0 and b_{-n} = left.in(n) for n >= 1.
class BDRates {
 public:
  enum class Family { kTable, kGeometric, kExponential, kPower, kCustom };

  static BDRates line(HalfLineRates right, HalfLineRates left, Family family);
  static BDRates symmetric(HalfLineRates side, Family family) {
    HalfLineRates left = side;
    return line(std::move(side), std::move(left), family);
  }
  // Support [0, +inf); a_0 = 0.
  static BDRates half_line(HalfLineRates right, Family family);
  // births[i] = b_{lo+i} for lo..hi-1, deaths[i] = a_{lo+1+i} for lo+1..hi.
  static BDRates table(std::int64_t lo, std::vector<double> births,
                       std::vector<double> deaths);

  Family family() const { return family_; }
  std::int64_t lo() const { return lo_; }  // kMinusInfinity if unbounded
  std::int64_t hi() const { return hi_; }  // kPlusInfinity if unbounded
  bool in_support(std::int64_t n) const { return n >= lo_ && n <= hi_; }

  // Logs of b_n, a_n. At a finite support end the outward rate is zero
  // (kLogZero); queries outside the support throw kWindowExceeded.
  Real log_birth(std::int64_t n) const;
  Real log_death(std::int64_t n) const;
  double birth(std::int64_t n) const { return static_cast<double>(std::exp(log_birth(n))); }
  double death(std::int64_t n) const { return static_cast<double>(std::exp(log_death(n))); }

  const HalfLineRates* right() const { return has_right_ ? &right_ : nullptr; }
  const HalfLineRates* left() const { return has_left_ ? &left_ : nullptr; }

 private:
  Family family_ = Family::kTable;
  std::int64_t lo_ = 0, hi_ = 0;
  bool has_right_ = false, has_left_ = false;
  HalfLineRates right_, left_;
  std::vector<Real> log_births_, log_deaths_;  // table family only
};

const char* family_name(BDRates::Family f);

}  // namespace sstlab
