#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sstlab/assumptions.hpp"
#include "sstlab/ctmc.hpp"
#include "sstlab/error.hpp"
#include "sstlab/graph_dual.hpp"
#include "sstlab/interval_dual.hpp"
#include "sstlab/intertwining.hpp"
#include "sstlab/rng.hpp"
#include "sstlab/stratified.hpp"

namespace sstlab {

// ---------------------------------------------------------------------------
// Criterion: sum_{i>=1} mu(i+1) sum_{j=1}^{i} 1/(mu(j) L_{j,j+1}) per side or
// branch, with mu taken relative to index 0.

struct CriterionSide {
  std::string label;  // "right", "left" or "branch 2"
  SeriesEvidence evidence;
  std::vector<double> terms;         // term i at position i-1
  std::vector<double> partial_sums;  // running sums, same indexing
};

struct CriterionReport {
  std::vector<CriterionSide> sides;
  SeriesVerdict verdict = SeriesVerdict::kInconclusive;
  AssumptionReport assumptions;
  // Set when recurrence or non-explosion fails or is inconclusive; the
  // criterion is only meaningful under those assumptions.
  bool flagged = false;
};

struct CriterionOptions {
  SeriesOptions series = [] {
    SeriesOptions s;
    s.rel_tol = 1e-13;
    return s;
  }();
  std::size_t record_terms = 10000;
};

CriterionSide criterion_side(const HalfLineView& view, std::string label,
                             const CriterionOptions& opts = {});
CriterionReport criterion(const BDRates& rates, const CriterionOptions& opts = {});
CriterionReport criterion(const GraphModel& graph, const CriterionOptions& opts = {});

// ---------------------------------------------------------------------------
// Separation on a reflecting truncation.

struct Truncation {
  Generator L;
  std::vector<std::string> labels;
  Eigen::VectorXd pi;       // stationary law of the untruncated chain on the kept states
  double tail_mass = 0;     // stationary mass outside the kept states
};

Truncation truncate_line(const BDRates& rates, std::int64_t lo, std::int64_t hi);
// Center plus branch vertices 0..depth.
Truncation truncate_graph(const GraphModel& graph, std::int64_t depth);

struct SeparationPoint {
  double t;
  double separation;
};

struct SeparationCurve {
  std::vector<SeparationPoint> points;
  std::string window;
  double tail_mass = 0;
  bool monotone = true;  // non-increasing within 1e-9
};

inline constexpr double kMaxTailMass = 1e-10;

// mu0 is a probability vector on the truncation's states. Throws
// WindowTooSmall when the excluded stationary mass exceeds max_tail_mass.
SeparationCurve separation_curve(const Truncation& tr, const Eigen::VectorXd& mu0,
                                 const std::vector<double>& grid,
                                 double max_tail_mass = kMaxTailMass);

// ---------------------------------------------------------------------------
// Statistics.

struct Interval {
  double lo, hi;
};

// Wilson score interval for k successes out of n at z standard deviations.
Interval wilson(std::int64_t k, std::int64_t n, double z);

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  int bins = 0;
  std::int64_t samples = 0;
  double p_value = 0;
};

// Bins with expected count >= 5 are kept; everything else, including the
// mass outside the listed states, is pooled into one bin.
ChiSquare chi_square(const std::vector<double>& probs, const std::vector<std::int64_t>& counts,
                     std::int64_t samples);

struct SurvivalPoint {
  double t;
  double survival;  // P^(T > t)
  double ci;        // one-sigma Wilson half-width
};

struct AbsorptionStats {
  std::int64_t trials = 0;
  std::int64_t absorbed = 0;
  std::int64_t undetected = 0;  // runs stopped by the table or jump budget
  std::vector<double> times;    // sorted absorption times
  std::vector<SurvivalPoint> grid;
  double ci_sigma = 1;

  std::int64_t non_absorbed() const { return trials - absorbed; }
  double cdf(double t) const;
};

AbsorptionStats absorption_stats(std::vector<double> times, std::int64_t trials,
                                 std::int64_t undetected, const std::vector<double>& grid);

// ---------------------------------------------------------------------------
// Parallel trial runner. Results are stored by trial index, so the merged
// output does not depend on the number of workers.

template <class R, class F>
std::vector<R> run_trials(std::int64_t n, int threads, F&& fn) {
  std::vector<R> out(static_cast<size_t>(n));
  const int w = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::int64_t>(n, 1))));
  if (w == 1) {
    for (std::int64_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  for (int k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::int64_t i = k; i < n; i += w) out[i] = fn(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline SeedSpec trial_seed(std::uint64_t seed, std::int64_t trial, int purpose) {
  return {seed, static_cast<std::uint64_t>(trial) * 4 + static_cast<std::uint64_t>(purpose)};
}

// ---------------------------------------------------------------------------
// Dual-only survey: absorption within the horizon and which infinities were
// reached.

struct SurveyTrial {
  std::optional<double> absorption_time;
  DualTerminal terminal = DualTerminal::kHorizonReached;
  std::vector<int> explosions;  // `which` of each explosion in order
};

template <class Model>
std::vector<SurveyTrial> survey(const Model& m, const typename Model::Dual& init,
                                std::int64_t trials, double horizon,
                                const ExplosionPolicy& policy, std::uint64_t seed, int threads) {
  return run_trials<SurveyTrial>(trials, threads, [&](std::int64_t i) {
    auto tr = simulate_stratified(m, init, horizon, policy, trial_seed(seed, i, 0));
    SurveyTrial s;
    s.absorption_time = tr.absorption_time;
    s.terminal = tr.terminal;
    for (const auto& e : tr.explosions) s.explosions.push_back(e.which);
    return s;
  });
}

// ---------------------------------------------------------------------------
// Strong stationary time experiment.

template <class Model>
struct ExperimentInit {
  using Primal = typename Model::Primal;
  using Dual = typename Model::Dual;
  // Set mode: X*_0 = set and X_0 ~ Lambda(set, .).
  std::optional<Dual> set;
  // Singleton mode: X_0 ~ mu0 and X*_0 = {X_0}.
  std::vector<std::pair<Primal, double>> mu0;
};

struct ExperimentSettingsRun {
  std::int64_t trials = 1000;
  double horizon = 1000;
  std::vector<double> grid;
  std::uint64_t seed = 1;
  int threads = 1;
  ExplosionPolicy policy;
};

template <class Primal>
struct SstTrial {
  std::optional<double> absorption_time;
  std::optional<Primal> x_at_absorption;
  bool undetected = false;
};

template <class Primal>
struct SstOutcome {
  AbsorptionStats stats;
  std::map<Primal, std::int64_t> x_at_absorption;  // counts over absorbed trials
};

template <class Model>
void check_compatible(const Model& m, const ExperimentInit<Model>& init) {
  if (init.set.has_value() == !init.mu0.empty()) {
    throw Error(ErrorCode::kNotLambdaCompatible,
                "exactly one of an initial dual set or a primal initial law is required");
  }
  if (init.set) {
    if (!(m.log_mass(*init.set) > kLogZero)) {
      throw Error(ErrorCode::kNotLambdaCompatible, "initial dual set has no mass");
    }
    return;
  }
  double total = 0;
  for (const auto& [x, p] : init.mu0) {
    if (!(p >= 0)) throw Error(ErrorCode::kNotLambdaCompatible, "negative initial weight");
    total += p;
  }
  if (std::abs(total - 1) > 1e-12) {
    throw Error(ErrorCode::kNotLambdaCompatible, "initial law does not sum to 1");
  }
}

// Coupled runs with the primal generated online; X_T is the primal observed
// when the dual is absorbed.
template <class Model>
SstOutcome<typename Model::Primal> sst_experiment(const Model& m,
                                                  const ExperimentInit<Model>& init,
                                                  const ExperimentSettingsRun& s) {
  using Primal = typename Model::Primal;
  using Dual = typename Model::Dual;
  check_compatible(m, init);
  std::vector<double> cum;
  for (const auto& [x, p] : init.mu0) cum.push_back((cum.empty() ? 0 : cum.back()) + p);
  auto trials = run_trials<SstTrial<Primal>>(s.trials, s.threads, [&](std::int64_t i) {
    CounterRng r0(trial_seed(s.seed, i, 0));
    Primal x0;
    Dual d0;
    if (init.set) {
      d0 = *init.set;
      x0 = m.sample_lambda(d0, r0);
    } else {
      const double u = r0.uniform() * cum.back();
      const size_t k = std::min<size_t>(
          std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), cum.size() - 1);
      x0 = init.mu0[k].first;
      d0 = singleton_of(m, x0);
    }
    OnlinePrimal<Model> src(m, trial_seed(s.seed, i, 1), s.horizon);
    CounterRng rc(trial_seed(s.seed, i, 2));
    CoupledOptions opts;
    opts.stop_at_absorption = true;
    opts.record = false;
    auto tr = run_coupled(m, x0, d0, src, s.policy, rc, opts);
    SstTrial<Primal> out;
    out.absorption_time = tr.absorption_time;
    out.x_at_absorption = tr.primal_at_absorption;
    out.undetected = tr.terminal == DualTerminal::kNoExplosionDetected;
    return out;
  });
  SstOutcome<Primal> out;
  std::vector<double> times;
  std::int64_t undetected = 0;
  for (const auto& t : trials) {
    if (t.absorption_time) {
      times.push_back(*t.absorption_time);
      ++out.x_at_absorption[*t.x_at_absorption];
    }
    undetected += t.undetected ? 1 : 0;
  }
  out.stats = absorption_stats(std::move(times), s.trials, undetected, s.grid);
  return out;
}

inline IntervalState singleton_of(const IntervalModel&, std::int64_t x) { return {x, x}; }
inline DualSet singleton_of(const GraphDualModel& m, const GraphVertex& x) {
  return m.singleton(x);
}

// Stationary probabilities of listed primal states.
std::vector<double> stationary_probs(const IntervalModel& m, const std::vector<std::int64_t>& xs);
std::vector<double> stationary_probs(const GraphDualModel& m, const std::vector<GraphVertex>& xs);

struct BoundRow {
  double t;
  double separation;
  double survival;
  double ci;
  bool bound_ok;  // separation <= survival + 3 ci
  bool sharp_ok;  // |separation - survival| <= 3 ci
};

std::vector<BoundRow> bound_check(const SeparationCurve& sep, const AbsorptionStats& stats);

// ---------------------------------------------------------------------------
// Intertwining check: law of X_t given X*_t = Q against Lambda(Q, .).

struct TvRow {
  std::string state;
  std::int64_t hits = 0;
  double tv = 0;
  double sigma = 0;  // 0.5 sum_x sqrt(p(1-p)/hits)
  bool ok = false;   // tv <= 3 sigma
};

template <class Model>
std::vector<TvRow> intertwining_tv(const Model& m, const ExperimentInit<Model>& init, double t,
                                   std::int64_t trials, std::int64_t min_hits,
                                   std::uint64_t seed, int threads) {
  using Primal = typename Model::Primal;
  using Dual = typename Model::Dual;
  check_compatible(m, init);
  auto samples = run_trials<std::pair<Dual, Primal>>(trials, threads, [&](std::int64_t i) {
    CounterRng r0(trial_seed(seed, i, 0));
    Dual d0;
    Primal x0;
    if (init.set) {
      d0 = *init.set;
      x0 = m.sample_lambda(d0, r0);
    } else {
      double u = r0.uniform();
      size_t k = 0;
      while (k + 1 < init.mu0.size() && u >= init.mu0[k].second) u -= init.mu0[k++].second;
      x0 = init.mu0[k].first;
      d0 = singleton_of(m, x0);
    }
    OnlinePrimal<Model> src(m, trial_seed(seed, i, 1), t);
    CounterRng rc(trial_seed(seed, i, 2));
    auto tr = run_coupled(m, x0, d0, src, ExplosionPolicy{}, rc);
    const auto& e = tr.at(t);
    return std::make_pair(e.dual, e.primal);
  });
  std::map<Dual, std::map<Primal, std::int64_t>> by_state;
  for (const auto& [d, x] : samples) ++by_state[d][x];
  std::vector<TvRow> rows;
  for (const auto& [d, counts] : by_state) {
    std::int64_t hits = 0;
    for (const auto& [x, c] : counts) hits += c;
    if (hits < min_hits) continue;
    auto support = m.lambda_support(d);
    if (!support) continue;
    TvRow row;
    row.state = encode(d);
    row.hits = hits;
    double tv = 0, sigma = 0;
    for (const Primal& x : *support) {
      const double p = static_cast<double>(std::exp(m.log_lambda(d, x)));
      auto it = counts.find(x);
      const double ph = it == counts.end() ? 0.0 : static_cast<double>(it->second) / hits;
      tv += std::abs(ph - p);
      sigma += std::sqrt(p * (1 - p) / static_cast<double>(hits));
    }
    for (const auto& [x, c] : counts) {
      if (m.log_lambda(d, x) == kLogZero) tv += static_cast<double>(c) / hits;
    }
    row.tv = tv / 2;
    row.sigma = sigma / 2;
    row.ok = row.tv <= 3 * row.sigma;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Martingale check: M_t = f(X*_t) - f(X*_0) - int_0^t L-hat f(X*_s) ds along
// the stratified process, where L-hat is the dual generator between
// explosions.

struct MeanEstimate {
  std::int64_t n = 0;
  double mean = 0;
  double sd = 0;
  double std_error() const { return n > 1 ? sd / std::sqrt(static_cast<double>(n)) : 0; }
  double z() const { return std_error() > 0 ? mean / std_error() : 0; }
};

MeanEstimate mean_estimate(const std::vector<double>& xs);

// f(Q) = min(|Q ∩ [-k, k]|, k).
std::function<double(const IntervalState&)> interval_count(std::int64_t k);
// f(Q) = min(number of center vertices and branch vertices of index < k in Q, k).
std::function<double(const DualSet&)> graph_count(const GraphDualModel& m, std::int64_t k);

template <class Model, class F>
double compensated_value(const Model& m, const DualTrajectory<typename Model::Dual>& tr,
                         double t, const F& f) {
  const auto& ev = tr.events;
  double integral = 0;
  for (size_t k = 0; k < ev.size() && ev[k].time < t; ++k) {
    const double end = k + 1 < ev.size() ? std::min(ev[k + 1].time, t) : t;
    const auto& d = ev[k].state;
    if (m.is_absorbing(d)) continue;
    const double fd = f(d);
    double lf = 0;
    for (const auto& [y, lr] : m.dual_moves(d)) {
      const double df = f(y) - fd;
      if (df != 0) lf += static_cast<double>(std::exp(lr)) * df;
    }
    integral += lf * (end - ev[k].time);
  }
  return f(tr.at(t)) - f(ev.front().state) - integral;
}

template <class Model, class F>
MeanEstimate martingale_check(const Model& m, const typename Model::Dual& init, double t,
                              const F& f, std::int64_t trials, std::uint64_t seed,
                              int threads) {
  auto vals = run_trials<double>(trials, threads, [&](std::int64_t i) {
    auto tr = simulate_stratified(m, init, t, ExplosionPolicy{}, trial_seed(seed, i, 0));
    if (tr.terminal == DualTerminal::kNoExplosionDetected) {
      throw Error(ErrorCode::kWindowExceeded, "dual left the tables before t");
    }
    return compensated_value(m, tr, t, f);
  });
  return mean_estimate(vals);
}

}  // namespace sstlab

namespace sstlab {

// ---------------------------------------------------------------------------
// Algebraic duality checks on enumerated dual states.

// All intervals [p, q] with lo <= p <= q <= hi inside the support.
std::vector<IntervalState> enumerate_intervals(const IntervalModel& m, std::int64_t lo,
                                               std::int64_t hi);
ResidualReport duality_check(const IntervalModel& m, std::int64_t lo, std::int64_t hi);

// All connected dual sets without Delta points whose branch indices stay
// within 0..depth.
std::vector<DualSet> enumerate_dual_sets(const GraphDualModel& m, std::int64_t depth);
ResidualReport duality_check(const GraphDualModel& m, std::int64_t depth);

}  // namespace sstlab
