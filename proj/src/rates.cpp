#include "sstlab/rates.hpp"

#include <cmath>
#include <string>

#include "sstlab/error.hpp"

namespace sstlab {

namespace {

Real checked_log(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidModel,
                std::string(what) + " must be positive and finite");
  }
  return std::log(static_cast<Real>(v));
}

}  // namespace

HalfLineRates HalfLineRates::power(double out_scale, double out_growth,
                                   double in_scale, double in_growth) {
  HalfLineRates r;
  r.kind_ = Kind::kPower;
  r.log_out_scale_ = checked_log(out_scale, "outward scale");
  r.log_out_growth_ = checked_log(out_growth, "outward growth");
  r.log_in_scale_ = checked_log(in_scale, "inward scale");
  r.log_in_growth_ = checked_log(in_growth, "inward growth");
  r.label_ = "power";
  return r;
}

HalfLineRates HalfLineRates::geometric(double base, double ratio) {
  HalfLineRates r = power(base, 1.0, base * ratio, 1.0);
  r.label_ = "geometric";
  return r;
}

HalfLineRates HalfLineRates::exponential(double base) {
  HalfLineRates r = power(1.0, base, 1.0, base);
  r.label_ = "exponential";
  return r;
}

HalfLineRates HalfLineRates::custom(LogRateFn log_out, LogRateFn log_in,
                                    std::string label) {
  HalfLineRates r;
  r.kind_ = Kind::kCustom;
  r.custom_out_ = std::make_shared<const LogRateFn>(std::move(log_out));
  r.custom_in_ = std::make_shared<const LogRateFn>(std::move(log_in));
  r.label_ = std::move(label);
  return r;
}

HalfLineRates HalfLineRates::with_prefix(const std::vector<double>& out,
                                         const std::vector<double>& in) const {
  if (out.size() != in.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prefix lengths differ");
  }
  HalfLineRates r = *this;
  std::vector<Real> po, pi;
  for (double v : out) po.push_back(checked_log(v, "prefix rate"));
  for (double v : in) pi.push_back(checked_log(v, "prefix rate"));
  po.insert(po.end(), prefix_out_.begin(), prefix_out_.end());
  pi.insert(pi.end(), prefix_in_.begin(), prefix_in_.end());
  r.prefix_out_ = std::move(po);
  r.prefix_in_ = std::move(pi);
  return r;
}

Real HalfLineRates::base_log_out(std::int64_t k) const {
  if (kind_ == Kind::kCustom) return (*custom_out_)(k);
  return log_out_scale_ + static_cast<Real>(k) * log_out_growth_;
}

Real HalfLineRates::base_log_in(std::int64_t k) const {
  if (kind_ == Kind::kCustom) return (*custom_in_)(k);
  return log_in_scale_ + static_cast<Real>(k) * log_in_growth_;
}

Real HalfLineRates::log_out(std::int64_t k) const {
  const auto m = static_cast<std::int64_t>(prefix_out_.size());
  if (k < m) return prefix_out_[k];
  return base_log_out(k - m);
}

Real HalfLineRates::log_in(std::int64_t k) const {
  const auto m = static_cast<std::int64_t>(prefix_in_.size());
  if (k <= m) return prefix_in_[k - 1];
  return base_log_in(k - m);
}

BDRates BDRates::line(HalfLineRates right, HalfLineRates left, Family family) {
  BDRates r;
  r.family_ = family;
  r.lo_ = kMinusInfinity;
  r.hi_ = kPlusInfinity;
  r.has_right_ = r.has_left_ = true;
  r.right_ = std::move(right);
  r.left_ = std::move(left);
  return r;
}

BDRates BDRates::half_line(HalfLineRates right, Family family) {
  BDRates r;
  r.family_ = family;
  r.lo_ = 0;
  r.hi_ = kPlusInfinity;
  r.has_right_ = true;
  r.right_ = std::move(right);
  return r;
}

BDRates BDRates::table(std::int64_t lo, std::vector<double> births,
                       std::vector<double> deaths) {
  if (births.size() != deaths.size()) {
    throw Error(ErrorCode::kInvalidModel,
                "table needs as many births as deaths");
  }
  BDRates r;
  r.family_ = Family::kTable;
  r.lo_ = lo;
  r.hi_ = lo + static_cast<std::int64_t>(births.size());
  for (double b : births) r.log_births_.push_back(checked_log(b, "birth rate"));
  for (double a : deaths) r.log_deaths_.push_back(checked_log(a, "death rate"));
  return r;
}

Real BDRates::log_birth(std::int64_t n) const {
  if (!in_support(n)) {
    throw Error(ErrorCode::kWindowExceeded,
                "birth rate queried at " + std::to_string(n) + " outside support");
  }
  if (n == hi_) return kLogZero;
  if (family_ == Family::kTable) return log_births_[n - lo_];
  if (n >= 0) return right_.log_out(n);
  return left_.log_in(-n);
}

Real BDRates::log_death(std::int64_t n) const {
  if (!in_support(n)) {
    throw Error(ErrorCode::kWindowExceeded,
                "death rate queried at " + std::to_string(n) + " outside support");
  }
  if (n == lo_) return kLogZero;
  if (family_ == Family::kTable) return log_deaths_[n - lo_ - 1];
  if (n >= 1) return right_.log_in(n);
  return left_.log_out(-n);
}

const char* family_name(BDRates::Family f) {
  switch (f) {
    case BDRates::Family::kTable: return "table";
    case BDRates::Family::kGeometric: return "geometric";
    case BDRates::Family::kExponential: return "exponential";
    case BDRates::Family::kPower: return "power";
    case BDRates::Family::kCustom: return "custom";
  }
  return "?";
}

}  // namespace sstlab
