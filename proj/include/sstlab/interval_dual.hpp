#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sstlab/measure.hpp"
#include "sstlab/rates.hpp"
#include "sstlab/rng.hpp"
#include "sstlab/stratified.hpp"

namespace sstlab {

// Interval [p, q] of Z; p may be kMinusInfinity and q kPlusInfinity.
struct IntervalState {
  std::int64_t p = 0;
  std::int64_t q = 0;

  bool left_infinite() const { return p == kMinusInfinity; }
  bool right_infinite() const { return q == kPlusInfinity; }
  bool contains(std::int64_t x) const { return x >= p && x <= q; }
  auto operator<=>(const IntervalState&) const = default;
};

// 1 (E1) both ends finite, 2 (E2) one end infinite, 3 (E3) the whole line.
int stratum(const IntervalState& s);
std::string encode(const IntervalState& s);       // "[p,q]", ends may be -inf/+inf
IntervalState parse_interval(const std::string& text);  // inverse of encode

// Dual rates of the interval chain, as (target, log rate). Up to four
// moves: grow left, grow right, shrink left, shrink right. Moves beyond
// an infinite end, beyond a finite support end, and the shrink moves of
// a singleton are omitted.
std::vector<std::pair<IntervalState, Real>> dual_rates(const IntervalState& s,
                                                        const BDRates& rates,
                                                        const MassTable& mu);

// Logs of the comparison rates (b~_n, a~_n) of the half-line (-inf, n].
std::pair<Real, Real> comparison_rates(std::int64_t n, const BDRates& rates,
                                       const MassTable& mu);

class IntervalModel {
 public:
  using Primal = std::int64_t;
  using Dual = IntervalState;

  static constexpr std::int64_t kDefaultExtent = 16384;

  explicit IntervalModel(BDRates rates, std::int64_t extent = kDefaultExtent,
                         const TailOptions& opts = {});

  const BDRates& rates() const { return rates_; }
  const MassTable& measure() const { return mu_; }
  Real log_mass(const IntervalState& s) const { return mu_.log_mass(s.p, s.q); }
  IntervalState full() const;  // the absorbing state

  std::vector<std::pair<std::int64_t, Real>> primal_moves(std::int64_t x) const;
  std::vector<std::pair<IntervalState, Real>> dual_moves(const IntervalState& s) const {
    return dual_rates(s, rates_, mu_);
  }
  Real log_lambda(const IntervalState& s, std::int64_t x) const;
  std::optional<std::vector<std::int64_t>> lambda_support(const IntervalState& s) const;
  bool is_absorbing(const IntervalState& s) const;
  int stratum(const IntervalState& s) const { return sstlab::stratum(s); }
  bool within_tables(const IntervalState& s) const;
  std::optional<ExplosionOutcome<IntervalState>> try_explode(const IntervalState& s,
                                                             const ExplosionPolicy& policy,
                                                             CounterRng& rng) const;
  std::int64_t sample_lambda(const IntervalState& s, CounterRng& rng) const;
  // True when the move x -> y starts an excursion away from x that lies in s
  // and whose mean duration mu(beyond x) / (mu(x) L_{x,y}) is below budget.
  bool negligible_excursion(std::int64_t x, std::int64_t y, const IntervalState& s,
                            double budget) const;

 private:
  BDRates rates_;
  MassTable mu_;

  // Tail passage bound sum 1/(inward rate) beyond an end; +inf if >= limit.
  double tail_time(std::int64_t end, int dir, double limit) const;
  double fast_forward(std::int64_t end, int dir, double delta, CounterRng& rng) const;
};

DualTrajectory<IntervalState> simulate_dual(const IntervalModel& model,
                                            const IntervalState& init, double horizon,
                                            const ExplosionPolicy& policy, SeedSpec seed);

// CSV: time, p, q, stratum, event.
void write_dual_csv(std::ostream& os, const DualTrajectory<IntervalState>& tr);

}  // namespace sstlab
