#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sstlab/rates.hpp"
#include "sstlab/rng.hpp"

namespace sstlab {

enum class Terminal { kHorizonReached, kAbsorbed, kJumpBudgetExhausted, kExploded };
const char* terminal_name(Terminal t);

template <class State>
struct Trajectory {
  std::vector<State> states;   // Y_0, Y_1, ...
  std::vector<double> times;   // T_0 = 0 < T_1 < ...
  Terminal terminal = Terminal::kHorizonReached;
  double horizon = 0;
  double explosion_time = 0;   // set only for kExploded

  size_t jumps() const { return states.empty() ? 0 : states.size() - 1; }
  // State occupied at time t (t within [0, horizon]).
  const State& at(double t) const {
    size_t lo = 0, hi = times.size();
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      if (times[mid] <= t) lo = mid; else hi = mid;
    }
    return states[lo];
  }
};

// A rate oracle exposes `row(x)` returning the finite list of (y, L_{x,y})
// with L_{x,y} > 0. The total rate L_x is the sum of the row.
template <class Oracle, class State>
Trajectory<State> simulate_minimal(const Oracle& oracle, State init, double horizon,
                                   std::int64_t max_jumps, SeedSpec seed) {
  CounterRng rng(seed);
  Trajectory<State> tr;
  tr.horizon = horizon;
  tr.states.push_back(init);
  tr.times.push_back(0.0);
  double t = 0;
  State x = std::move(init);
  for (std::int64_t j = 0;; ++j) {
    const auto row = oracle.row(x);
    double total = 0;
    for (const auto& [y, r] : row) total += r;
    if (total <= 0) {
      tr.terminal = Terminal::kAbsorbed;
      return tr;
    }
    if (j >= max_jumps) {
      tr.terminal = Terminal::kJumpBudgetExhausted;
      return tr;
    }
    t += rng.exponential() / total;
    if (t > horizon) {
      tr.terminal = Terminal::kHorizonReached;
      return tr;
    }
    double u = rng.uniform() * total;
    size_t k = 0;
    for (; k + 1 < row.size(); ++k) {
      u -= row[k].second;
      if (u < 0) break;
    }
    x = row[k].first;
    tr.states.push_back(x);
    tr.times.push_back(t);
  }
}

// CSV dump: jump index, time, state encoding.
template <class State, class Encode>
void write_trajectory_csv(std::ostream& os, const Trajectory<State>& tr, Encode encode) {
  os << "# sstlab trajectory v1\n";
  os << "jump,time,state\n";
  char buf[64];
  for (size_t i = 0; i < tr.states.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", tr.times[i]);
    os << i << ',' << buf << ',' << encode(tr.states[i]) << '\n';
  }
  os << "# terminal " << terminal_name(tr.terminal) << '\n';
}

using Generator = Eigen::MatrixXd;

// Throws kNonSquare or kBadRowSums (|row sum| > 1e-10 * max(1, |L_ii|)).
void validate_generator(const Generator& L);

// mu0 exp(tL). Uniformization when q t is moderate (q = max exit rate);
// otherwise scaling and squaring of the uniformized Taylor polynomial in
// binary128, whose terms are all nonnegative.
Eigen::VectorXd transient_distribution(const Generator& L, const Eigen::VectorXd& mu0,
                                       double t);
Eigen::MatrixXd transition_matrix(const Generator& L, double t);

// Birth-death generator on [lo, hi] with reflecting ends.
Generator truncate_bd(const BDRates& rates, std::int64_t lo, std::int64_t hi);

}  // namespace sstlab
