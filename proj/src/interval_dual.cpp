#include "sstlab/interval_dual.hpp"

#include <cmath>
#include <cstdio>

#include "sstlab/error.hpp"

namespace sstlab {

int stratum(const IntervalState& s) {
  return 1 + (s.left_infinite() ? 1 : 0) + (s.right_infinite() ? 1 : 0);
}

std::string encode(const IntervalState& s) {
  return "[" + (s.left_infinite() ? std::string("-inf") : std::to_string(s.p)) + "," +
         (s.right_infinite() ? std::string("+inf") : std::to_string(s.q)) + "]";
}

IntervalState parse_interval(const std::string& text) {
  const auto comma = text.find(',');
  if (text.size() < 5 || text.front() != '[' || text.back() != ']' ||
      comma == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "bad interval '" + text + "'");
  }
  const std::string a = text.substr(1, comma - 1);
  const std::string b = text.substr(comma + 1, text.size() - comma - 2);
  IntervalState s;
  try {
    s.p = a == "-inf" ? kMinusInfinity : std::stoll(a);
    s.q = (b == "+inf" || b == "inf") ? kPlusInfinity : std::stoll(b);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad interval '" + text + "'");
  }
  if (s.p > s.q) throw Error(ErrorCode::kInvalidArgument, "empty interval '" + text + "'");
  return s;
}

std::vector<std::pair<IntervalState, Real>> dual_rates(const IntervalState& s,
                                                        const BDRates& rates,
                                                        const MassTable& mu) {
  std::vector<std::pair<IntervalState, Real>> out;
  const Real m = mu.log_mass(s.p, s.q);
  auto add = [&](IntervalState t, Real log_rate) {
    if (log_rate == kLogZero) return;
    out.push_back({t, mu.log_mass(t.p, t.q) - m + log_rate});
  };
  const bool lf = !s.left_infinite(), rf = !s.right_infinite();
  // grow left: b_{p-1}
  if (lf && rates.in_support(s.p - 1)) add({s.p - 1, s.q}, rates.log_birth(s.p - 1));
  // grow right: a_{q+1}
  if (rf && rates.in_support(s.q + 1)) add({s.p, s.q + 1}, rates.log_death(s.q + 1));
  if (lf && rf && s.p == s.q) return out;
  // shrink left: a_p
  if (lf) add({s.p + 1, s.q}, rates.log_death(s.p));
  // shrink right: b_q
  if (rf) add({s.p, s.q - 1}, rates.log_birth(s.q));
  return out;
}

std::pair<Real, Real> comparison_rates(std::int64_t n, const BDRates& rates,
                                       const MassTable& mu) {
  const Real m = mu.log_mass_to(n);
  Real up = kLogZero, down = kLogZero;
  if (rates.in_support(n + 1)) up = mu.log_mass_to(n + 1) - m + rates.log_death(n + 1);
  if (rates.in_support(n - 1)) down = mu.log_mass_to(n - 1) - m + rates.log_birth(n);
  return {up, down};
}

IntervalModel::IntervalModel(BDRates rates, std::int64_t extent, const TailOptions& opts)
    : rates_(std::move(rates)) {
  const std::int64_t lo = rates_.lo() == kMinusInfinity ? -extent : rates_.lo();
  const std::int64_t hi = rates_.hi() == kPlusInfinity ? extent : rates_.hi();
  mu_ = mu_bd(rates_, lo, hi, opts);
}

IntervalState IntervalModel::full() const {
  return {rates_.lo(), rates_.hi()};
}

std::vector<std::pair<std::int64_t, Real>> IntervalModel::primal_moves(std::int64_t x) const {
  std::vector<std::pair<std::int64_t, Real>> out;
  const Real b = rates_.log_birth(x), a = rates_.log_death(x);
  if (b != kLogZero) out.push_back({x + 1, b});
  if (a != kLogZero) out.push_back({x - 1, a});
  return out;
}

Real IntervalModel::log_lambda(const IntervalState& s, std::int64_t x) const {
  if (!s.contains(x) || !rates_.in_support(x)) return kLogZero;
  return mu_.log_weight(x) - log_mass(s);
}

std::optional<std::vector<std::int64_t>> IntervalModel::lambda_support(
    const IntervalState& s) const {
  if (s.left_infinite() || s.right_infinite()) return std::nullopt;
  std::vector<std::int64_t> v;
  for (std::int64_t x = s.p; x <= s.q; ++x) v.push_back(x);
  return v;
}

bool IntervalModel::is_absorbing(const IntervalState& s) const {
  return s.p <= rates_.lo() && s.q >= rates_.hi();
}

bool IntervalModel::within_tables(const IntervalState& s) const {
  const bool left_ok = s.left_infinite() || s.p == rates_.lo() || s.p - 1 >= mu_.lo();
  const bool right_ok = s.right_infinite() || s.q == rates_.hi() || s.q + 1 <= mu_.hi();
  return left_ok && right_ok;
}

double IntervalModel::tail_time(std::int64_t end, int dir, double limit) const {
  // Passing beyond `end` needs the inward rate of each site further out
  // (a_m for the right end, b_m for the left end); the dual's outward
  // rate at that site is at least this large.
  long double sum = 0;
  for (std::int64_t k = 1; k <= 1000000; ++k) {
    const std::int64_t m = end + dir * k;
    if (!mu_.contains(m)) return kInf;
    const Real lr = dir > 0 ? rates_.log_death(m) : rates_.log_birth(m);
    const long double term = std::exp(-lr);
    sum += term;
    if (sum >= limit) return kInf;
    if (term < 1e-18L * sum) return static_cast<double>(sum);
  }
  return kInf;
}

double IntervalModel::fast_forward(std::int64_t end, int dir, double delta,
                                   CounterRng& rng) const {
  double t = 0;
  for (std::int64_t k = 1; k <= 1000000; ++k) {
    const std::int64_t m = end + dir * k;
    if (!mu_.contains(m)) break;
    const Real lr = dir > 0 ? rates_.log_death(m) : rates_.log_birth(m);
    const double mean = static_cast<double>(std::exp(-lr));
    if (mean < delta * 1e-6) break;
    t += rng.exponential() * mean;
  }
  return t;
}

std::optional<ExplosionOutcome<IntervalState>> IntervalModel::try_explode(
    const IntervalState& s, const ExplosionPolicy& policy, CounterRng& rng) const {
  const double delta = policy.tail_time_budget;
  const std::int64_t M = policy.bound_threshold;
  for (int dir : {+1, -1}) {
    const bool finite = dir > 0 ? !s.right_infinite() : !s.left_infinite();
    if (!finite) continue;
    const std::int64_t end = dir > 0 ? s.q : s.p;
    const bool unbounded = dir > 0 ? rates_.hi() == kPlusInfinity : rates_.lo() == kMinusInfinity;
    if (!unbounded || dir * end <= M) continue;
    if (tail_time(end, dir, delta) >= delta) continue;
    ExplosionOutcome<IntervalState> ex;
    ex.after = s;
    if (dir > 0) ex.after.q = kPlusInfinity; else ex.after.p = kMinusInfinity;
    ex.remainder = fast_forward(end, dir, delta, rng);
    ex.which = dir;
    ex.stratum_before = sstlab::stratum(s);
    ex.stratum_after = sstlab::stratum(ex.after);
    return ex;
  }
  return std::nullopt;
}

std::int64_t IntervalModel::sample_lambda(const IntervalState& s, CounterRng& rng) const {
  const Real target = log_mass(s) + std::log(static_cast<Real>(rng.uniform()));
  std::int64_t lo = std::max(s.p, mu_.lo());
  std::int64_t hi = std::min(s.q, mu_.hi());
  // Smallest x with mu([p, x]) >= target.
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (mu_.log_mass(s.p, mid) >= target) hi = mid; else lo = mid + 1;
  }
  return lo;
}

DualTrajectory<IntervalState> simulate_dual(const IntervalModel& model,
                                            const IntervalState& init, double horizon,
                                            const ExplosionPolicy& policy, SeedSpec seed) {
  return simulate_stratified(model, init, horizon, policy, seed);
}

void write_dual_csv(std::ostream& os, const DualTrajectory<IntervalState>& tr) {
  os << "# sstlab interval dual trajectory v1\n";
  os << "time,p,q,stratum,event\n";
  char buf[64];
  for (const auto& e : tr.events) {
    std::snprintf(buf, sizeof buf, "%.17g", e.time);
    os << buf << ','
       << (e.state.left_infinite() ? std::string("-inf") : std::to_string(e.state.p)) << ','
       << (e.state.right_infinite() ? std::string("+inf") : std::to_string(e.state.q)) << ','
       << stratum(e.state) << ',' << dual_event_name(e.kind) << '\n';
  }
  os << "# terminal " << dual_terminal_name(tr.terminal);
  if (tr.absorption_time) {
    std::snprintf(buf, sizeof buf, "%.17g", *tr.absorption_time);
    os << " absorption_time " << buf;
  }
  os << '\n';
}

}  // namespace sstlab

namespace sstlab {

bool IntervalModel::negligible_excursion(std::int64_t x, std::int64_t y, const IntervalState& s,
                                         double budget) const {
  Real beyond, flux;
  if (y == x + 1 && s.right_infinite()) {
    beyond = mu_.log_mass_from(y);
    flux = mu_.log_weight(x) + rates_.log_birth(x);
  } else if (y == x - 1 && s.left_infinite()) {
    beyond = mu_.log_mass_to(y);
    flux = mu_.log_weight(x) + rates_.log_death(x);
  } else {
    return false;
  }
  return beyond - flux < std::log(static_cast<Real>(budget));
}

}  // namespace sstlab
