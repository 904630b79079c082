#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sstlab/numeric.hpp"
#include "sstlab/rng.hpp"

namespace sstlab {

struct ExplosionPolicy {
  std::int64_t bound_threshold = 64;     // M
  double tail_time_budget = 1e-9;        // delta
  std::int64_t jump_budget = 10000000;   // per excursion
  // Coupled runs: a primal excursion that stays inside the dual set and has
  // mean duration below this budget is collapsed to zero time.
  double excursion_time_budget = 1e-12;
};

// Result of a declared explosion: the dual state with the exploded end
// replaced by its compactification point, and the fast-forwarded time.
template <class Dual>
struct ExplosionOutcome {
  Dual after;
  double remainder = 0;
  int which = 0;  // +1/-1 for interval ends, branch index for graphs
  int stratum_before = 0;
  int stratum_after = 0;
};

enum class DualEventKind { kStart, kJump, kExplosion };
enum class DualTerminal { kAbsorbed, kHorizonReached, kNoExplosionDetected };
const char* dual_event_name(DualEventKind k);
const char* dual_terminal_name(DualTerminal t);

struct ExplosionRecord {
  double time = 0;
  int which = 0;
  int stratum_before = 0;
  int stratum_after = 0;
};

template <class Dual>
struct DualEvent {
  double time;
  Dual state;
  DualEventKind kind;
};

template <class Dual>
struct DualTrajectory {
  std::vector<DualEvent<Dual>> events;
  std::vector<ExplosionRecord> explosions;
  std::optional<double> absorption_time;
  DualTerminal terminal = DualTerminal::kHorizonReached;
  std::string detail;  // reason for kNoExplosionDetected
  double horizon = 0;

  // State occupied at time t.
  const Dual& at(double t) const {
    size_t lo = 0, hi = events.size();
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      if (events[mid].time <= t) lo = mid; else hi = mid;
    }
    return events[lo].state;
  }
};

// Samples an index with probabilities rates[i] / total. Rounding leftovers
// go to the last candidate.
inline size_t pick(const std::vector<double>& rates, double total, double u) {
  double x = u * total;
  for (size_t k = 0; k + 1 < rates.size(); ++k) {
    x -= rates[k];
    if (x < 0) return k;
  }
  return rates.size() - 1;
}

// Event-driven simulation of a stratified dual chain. The model provides
//   dual_moves(d) -> vector<pair<Dual, Real log_rate>>
//   is_absorbing(d), stratum(d), within_tables(d)
//   try_explode(d, policy, rng) -> optional<ExplosionOutcome<Dual>>
template <class Model, class Dual>
DualTrajectory<Dual> simulate_stratified(const Model& model, Dual init, double horizon,
                                         const ExplosionPolicy& policy, SeedSpec seed) {
  CounterRng rng(seed);
  DualTrajectory<Dual> tr;
  tr.horizon = horizon;
  double t = 0;
  Dual d = std::move(init);
  tr.events.push_back({0.0, d, DualEventKind::kStart});
  std::int64_t excursion_jumps = 0;
  std::vector<double> rates;
  while (true) {
    if (model.is_absorbing(d)) {
      tr.absorption_time = t;
      tr.terminal = DualTerminal::kAbsorbed;
      return tr;
    }
    if (auto ex = model.try_explode(d, policy, rng)) {
      t += ex->remainder;
      if (t > horizon) {
        tr.terminal = DualTerminal::kHorizonReached;
        return tr;
      }
      tr.explosions.push_back({t, ex->which, ex->stratum_before, ex->stratum_after});
      d = std::move(ex->after);
      tr.events.push_back({t, d, DualEventKind::kExplosion});
      excursion_jumps = 0;
      continue;
    }
    if (!model.within_tables(d)) {
      tr.terminal = DualTerminal::kNoExplosionDetected;
      tr.detail = "a bound reached the end of the tabulated measure";
      return tr;
    }
    if (excursion_jumps >= policy.jump_budget) {
      tr.terminal = DualTerminal::kNoExplosionDetected;
      tr.detail = "jump budget exhausted";
      return tr;
    }
    auto moves = model.dual_moves(d);
    rates.clear();
    double total = 0;
    for (const auto& m : moves) {
      rates.push_back(static_cast<double>(std::exp(m.second)));
      total += rates.back();
    }
    if (total <= 0) {
      tr.terminal = DualTerminal::kHorizonReached;
      return tr;
    }
    t += rng.exponential() / total;
    if (t > horizon) {
      tr.terminal = DualTerminal::kHorizonReached;
      return tr;
    }
    d = std::move(moves[pick(rates, total, rng.uniform())].first);
    tr.events.push_back({t, d, DualEventKind::kJump});
    ++excursion_jumps;
  }
}

}  // namespace sstlab
