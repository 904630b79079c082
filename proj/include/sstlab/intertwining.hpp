#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sstlab/ctmc.hpp"
#include "sstlab/error.hpp"
#include "sstlab/numeric.hpp"
#include "sstlab/rng.hpp"
#include "sstlab/stratified.hpp"

namespace sstlab {

// A dual model couples a primal generator L and a set-valued dual L* through
// Lambda(Q, x) = mu(x) 1{x in Q} / mu(Q). Required members:
//   using Primal, Dual (ordered, equality comparable)
//   primal_moves(x) -> vector<pair<Primal, Real log_rate>>
//   dual_moves(d)   -> vector<pair<Dual, Real log_rate>>
//   log_lambda(d, x) -> Real (kLogZero off the support)
//   is_absorbing(d), stratum(d), within_tables(d), try_explode(d, policy, rng)
//   sample_lambda(d, rng) -> Primal

template <class Primal>
struct LambdaRow {
  std::vector<std::pair<Primal, Real>> entries;  // (x, log Lambda(Q, x))
  Real log_tail = kLogZero;  // mass of the support beyond the listed entries
  Real total() const {
    Real s = log_tail;
    for (const auto& e : entries) s = log_add(s, e.second);
    return s;
  }
};

enum class CaseTag { kDiagonal, kPrimalMove, kDualMove, kJointMove, kZero };
const char* case_tag_name(CaseTag t);

struct CoupledRate {
  Real rate = 0;
  CaseTag tag = CaseTag::kZero;
  Real gamma = 0;  // Gamma(x*, y), filled for the joint and diagonal cases
};

// Coupling generator with Gamma = L* Lambda memoized per (x*, y).
template <class Model>
class CouplingGenerator {
 public:
  using Primal = typename Model::Primal;
  using Dual = typename Model::Dual;

  explicit CouplingGenerator(const Model& m) : m_(m) {}

  // (L* Lambda)(x*, y) = sum_{y*} L*_{x*,y*} (Lambda(y*, y) - Lambda(x*, y)).
  Real gamma(const Dual& xs, const Primal& y) const {
    auto key = std::make_pair(xs, y);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Real lx = lambda(xs, y);
    Real g = 0;
    for (const auto& [ys, lr] : m_.dual_moves(xs)) {
      g += std::exp(lr) * (lambda(ys, y) - lx);
    }
    cache_.emplace(key, g);
    return g;
  }

  Real primal_rate(const Primal& x, const Primal& y) const {
    for (const auto& [z, lr] : m_.primal_moves(x)) {
      if (z == y) return std::exp(lr);
    }
    return 0;
  }
  Real primal_total(const Primal& x) const {
    Real s = 0;
    for (const auto& [z, lr] : m_.primal_moves(x)) s += std::exp(lr);
    return s;
  }
  Real dual_rate(const Dual& xs, const Dual& ys) const {
    for (const auto& [z, lr] : m_.dual_moves(xs)) {
      if (z == ys) return std::exp(lr);
    }
    return 0;
  }
  Real dual_total(const Dual& xs) const {
    if (m_.is_absorbing(xs)) return 0;
    Real s = 0;
    for (const auto& [z, lr] : m_.dual_moves(xs)) s += std::exp(lr);
    return s;
  }
  Real lambda(const Dual& d, const Primal& x) const {
    const Real l = m_.log_lambda(d, x);
    return l == kLogZero ? 0 : std::exp(l);
  }

  CoupledRate rate(const Primal& x, const Dual& xs, const Primal& y, const Dual& ys) const {
    const Real lxx = lambda(xs, x);
    if (lxx <= 0) throw Error(ErrorCode::kOffSupport, "Lambda(x*, x) = 0");
    CoupledRate out;
    if (x == y && xs == ys) {
      out.tag = CaseTag::kDiagonal;
      out.gamma = gamma(xs, x);
      out.rate = -(primal_total(x) + dual_total(xs) + out.gamma / lxx);
      return out;
    }
    if (lambda(ys, y) <= 0) return out;  // target outside the coupled space
    if (y != x && ys == xs) {
      out.tag = CaseTag::kPrimalMove;
      out.rate = primal_rate(x, y);
      return out;
    }
    if (y == x) {
      out.tag = CaseTag::kDualMove;
      out.rate = dual_rate(xs, ys) * lambda(ys, x) / lxx;
      return out;
    }
    if (lambda(xs, y) == 0) {
      const Real lr = primal_rate(x, y) * dual_rate(xs, ys);
      if (lr > 0) {
        out.tag = CaseTag::kJointMove;
        out.gamma = gamma(xs, y);
        out.rate = lr * lambda(ys, y) / out.gamma;
      }
    }
    return out;
  }

  // Every target with a possibly nonzero rate from (x, x*), diagonal first.
  std::vector<std::pair<Primal, Dual>> targets(const Primal& x, const Dual& xs) const {
    std::vector<std::pair<Primal, Dual>> out{{x, xs}};
    const auto dm = m_.is_absorbing(xs) ? decltype(m_.dual_moves(xs)){} : m_.dual_moves(xs);
    for (const auto& [ys, lr] : dm) out.push_back({x, ys});
    for (const auto& [y, lr] : m_.primal_moves(x)) {
      if (lambda(xs, y) > 0) {
        out.push_back({y, xs});
      } else {
        for (const auto& [ys, lr2] : dm) out.push_back({y, ys});
      }
    }
    return out;
  }

 private:
  const Model& m_;
  mutable std::map<std::pair<Dual, Primal>, Real> cache_;
};

template <class Model>
CoupledRate coupled_rate(const Model& m, const typename Model::Primal& x,
                         const typename Model::Dual& xs, const typename Model::Primal& y,
                         const typename Model::Dual& ys) {
  return CouplingGenerator<Model>(m).rate(x, xs, y, ys);
}

struct ResidualReport {
  Real max_interior = 0;
  Real max_boundary = 0;
  std::int64_t interior_rows = 0;
  std::int64_t boundary_rows = 0;
  std::string worst;  // description of the worst interior entry
};

// max |(L* Lambda)(Q, p) - (Lambda L)(Q, p)| over Q in `duals` and p in
// `columns`. A row is interior when Q and all its dual neighbors have
// finite Lambda-supports inside `columns` together with their primal
// neighbors; the other rows are reported separately.
template <class Model, class Encode>
ResidualReport algebraic_residual(const Model& m,
                                  const std::vector<typename Model::Dual>& duals,
                                  const std::vector<typename Model::Primal>& columns,
                                  Encode encode) {
  using Primal = typename Model::Primal;
  std::set<Primal> colset(columns.begin(), columns.end());
  std::map<Primal, std::vector<std::pair<Primal, Real>>> in_rates;  // p -> (z, L_{z,p})
  std::map<Primal, Real> out_total;
  for (const Primal& p : columns) {
    Real tot = 0;
    for (const auto& [z, lr] : m.primal_moves(p)) {
      tot += std::exp(lr);
      Real back = 0;
      for (const auto& [w, lr2] : m.primal_moves(z)) {
        if (w == p) back = std::exp(lr2);
      }
      in_rates[p].push_back({z, back});
    }
    out_total[p] = tot;
  }
  auto lam = [&](const auto& d, const Primal& x) {
    const Real l = m.log_lambda(d, x);
    return l == kLogZero ? Real{0} : std::exp(l);
  };
  auto support_inside = [&](const auto& d) {
    auto supp = m.lambda_support(d);
    if (!supp) return false;
    for (const Primal& x : *supp) {
      if (!colset.count(x)) return false;
      for (const auto& [z, lr] : m.primal_moves(x)) {
        if (!colset.count(z)) return false;
      }
    }
    return true;
  };
  ResidualReport rep;
  for (const auto& q : duals) {
    const auto moves = m.is_absorbing(q) ? decltype(m.dual_moves(q)){} : m.dual_moves(q);
    bool interior = support_inside(q);
    for (const auto& [qq, lr] : moves) interior = interior && support_inside(qq);
    Real total = 0;
    for (const auto& [qq, lr] : moves) total += std::exp(lr);
    Real worst = 0;
    Primal worst_p = columns.front();
    for (const Primal& p : columns) {
      Real lhs = -total * lam(q, p);
      for (const auto& [qq, lr] : moves) lhs += std::exp(lr) * lam(qq, p);
      Real rhs = -out_total[p] * lam(q, p);
      for (const auto& [z, r] : in_rates[p]) rhs += lam(q, z) * r;
      const Real diff = std::abs(lhs - rhs);
      if (diff > worst) {
        worst = diff;
        worst_p = p;
      }
    }
    if (interior) {
      ++rep.interior_rows;
      if (worst > rep.max_interior) {
        rep.max_interior = worst;
        rep.worst = encode(q, worst_p);
      }
    } else {
      ++rep.boundary_rows;
      rep.max_boundary = std::max(rep.max_boundary, worst);
    }
  }
  return rep;
}

enum class CoupledEventKind { kStart, kPrimalJump, kDualJump, kExplosion };
const char* coupled_event_name(CoupledEventKind k);

template <class Primal, class Dual>
struct CoupledEvent {
  double time;
  Primal primal;
  Dual dual;
  CoupledEventKind kind;
};

template <class Primal, class Dual>
struct CoupledTrajectory {
  std::vector<CoupledEvent<Primal, Dual>> events;
  std::vector<ExplosionRecord> explosions;
  std::optional<double> absorption_time;
  std::optional<Primal> primal_at_absorption;
  DualTerminal terminal = DualTerminal::kHorizonReached;
  double end_time = 0;

  const CoupledEvent<Primal, Dual>& at(double t) const {
    size_t lo = 0, hi = events.size();
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      if (events[mid].time <= t) lo = mid; else hi = mid;
    }
    return events[lo];
  }
};

// Primal jumps replayed from a recorded trajectory.
template <class Primal>
class RecordedPrimal {
 public:
  static constexpr bool kCollapsible = false;  // replays every recorded jump
  explicit RecordedPrimal(const Trajectory<Primal>& tr) : tr_(tr) {}
  double end_time() const { return tr_.horizon; }
  std::optional<std::pair<double, Primal>> next(const Primal&) {
    if (i_ + 1 >= tr_.states.size()) return std::nullopt;
    ++i_;
    return std::make_pair(tr_.times[i_], tr_.states[i_]);
  }

 private:
  const Trajectory<Primal>& tr_;
  size_t i_ = 0;
};

// Primal jumps generated on the fly from the model's generator.
template <class Model>
class OnlinePrimal {
 public:
  using Primal = typename Model::Primal;
  static constexpr bool kCollapsible = true;
  OnlinePrimal(const Model& m, SeedSpec seed, double horizon)
      : m_(m), rng_(seed), horizon_(horizon) {}
  double end_time() const { return horizon_; }
  std::optional<std::pair<double, Primal>> next(const Primal& x) {
    auto moves = m_.primal_moves(x);
    rates_.clear();
    double total = 0;
    for (const auto& mv : moves) {
      rates_.push_back(static_cast<double>(std::exp(mv.second)));
      total += rates_.back();
    }
    if (total <= 0) return std::nullopt;
    t_ += rng_.exponential() / total;
    if (t_ > horizon_) return std::nullopt;
    return std::make_pair(t_, moves[pick(rates_, total, rng_.uniform())].first);
  }

 private:
  const Model& m_;
  CounterRng rng_;
  double horizon_;
  double t_ = 0;
  std::vector<double> rates_;
};

struct CoupledOptions {
  bool stop_at_absorption = false;
  bool record = true;  // keep the full event log
};

// Builds X* from X following the two-case construction: a dual-only clock
// of rate L-bar(x, x*) - L_x competes with the next primal jump; when the
// primal jumps out of x* the dual jumps jointly.
template <class Model, class Source>
CoupledTrajectory<typename Model::Primal, typename Model::Dual> run_coupled(
    const Model& m, typename Model::Primal x, typename Model::Dual d, Source& src,
    const ExplosionPolicy& policy, CounterRng& rng, const CoupledOptions& opts = {}) {
  using Primal = typename Model::Primal;
  using Dual = typename Model::Dual;
  CoupledTrajectory<Primal, Dual> tr;
  if (m.log_lambda(d, x) == kLogZero) {
    throw Error(ErrorCode::kInconsistentInput, "Lambda(x*_0, x_0) = 0");
  }
  const double horizon = src.end_time();
  double t = 0;
  auto record = [&](CoupledEventKind k) {
    if (opts.record || k == CoupledEventKind::kStart) tr.events.push_back({t, x, d, k});
  };
  record(CoupledEventKind::kStart);
  auto nxt = src.next(x);
  std::int64_t excursion_jumps = 0;
  std::vector<std::pair<Dual, Real>> moves;
  std::vector<double> rates;

  auto explode = [&](double limit) {
    while (auto ex = m.try_explode(d, policy, rng)) {
      const double te = std::min(t + ex->remainder, limit);
      t = te;
      tr.explosions.push_back({t, ex->which, ex->stratum_before, ex->stratum_after});
      d = std::move(ex->after);
      record(CoupledEventKind::kExplosion);
      excursion_jumps = 0;
    }
  };

  while (true) {
    if (m.is_absorbing(d) && !tr.absorption_time) {
      tr.absorption_time = t;
      tr.primal_at_absorption = x;
      tr.terminal = DualTerminal::kAbsorbed;
      if (opts.stop_at_absorption) break;
    }
    const double sigma = nxt ? nxt->first : horizon;
    explode(sigma);
    if (m.is_absorbing(d) && !tr.absorption_time) continue;
    if (!tr.absorption_time && !m.within_tables(d)) {
      tr.terminal = DualTerminal::kNoExplosionDetected;
      break;
    }
    if (!tr.absorption_time && excursion_jumps >= policy.jump_budget) {
      tr.terminal = DualTerminal::kNoExplosionDetected;
      break;
    }
    // Dual-only candidates (x, y*) with rates L*_{x*,y*} Lambda(y*,x) / Lambda(x*,x).
    rates.clear();
    moves.clear();
    double R = 0;
    if (!m.is_absorbing(d)) {
      moves = m.dual_moves(d);
      const Real lxx = m.log_lambda(d, x);
      Real lsum = 0, dual_total = 0;
      for (const auto& [ys, lr] : moves) {
        const Real l = m.log_lambda(ys, x);
        const Real r = l == kLogZero ? 0 : std::exp(lr + l - lxx);
        rates.push_back(static_cast<double>(r));
        lsum += r;
        dual_total += std::exp(lr);
      }
      // Row total L*_{x*} + Gamma(x*,x)/Lambda(x*,x); for the reversible
      // kernel Gamma(x*,x)/Lambda(x*,x) is minus the exit rate of x from x*.
      Real exit = 0;
      for (const auto& [z, lr] : m.primal_moves(x)) {
        if (m.log_lambda(d, z) == kLogZero) exit += std::exp(lr);
      }
      const Real exact = dual_total - exit;
      if (std::abs(exact - lsum) > 1e-9L * (dual_total + exit)) {
        throw Error(ErrorCode::kInconsistentInput, "dual-only rates do not sum to the row total");
      }
      R = static_cast<double>(exact);
    }
    const double eps = R > 0 ? rng.exponential() / R : kInf;
    if (t + eps < sigma) {
      t += eps;
      d = moves[pick(rates, R, rng.uniform())].first;
      ++excursion_jumps;
      record(CoupledEventKind::kDualJump);
      continue;
    }
    if (!nxt) {
      t = horizon;
      break;
    }
    t = sigma;
    const Primal y = nxt->second;
    if constexpr (Source::kCollapsible) {
      if (m.log_lambda(d, y) != kLogZero &&
          m.negligible_excursion(x, y, d, policy.excursion_time_budget)) {
        nxt = src.next(x);
        continue;
      }
    }
    if (m.log_lambda(d, y) == kLogZero) {
      // Joint move: y* with probability L*_{x*,y*} Lambda(y*,y) / Gamma(x*,y).
      if (moves.empty()) moves = m.dual_moves(d);
      rates.clear();
      double g = 0;
      for (const auto& [ys, lr] : moves) {
        const Real l = m.log_lambda(ys, y);
        rates.push_back(l == kLogZero ? 0.0 : static_cast<double>(std::exp(lr + l)));
        g += rates.back();
      }
      if (!(g > 0)) {
        throw Error(ErrorCode::kInconsistentInput, "primal left the dual with no joint move");
      }
      d = moves[pick(rates, g, rng.uniform())].first;
      ++excursion_jumps;
    }
    x = y;
    record(CoupledEventKind::kPrimalJump);
    nxt = src.next(x);
  }
  tr.end_time = t;
  return tr;
}

template <class Model>
CoupledTrajectory<typename Model::Primal, typename Model::Dual> simulate_dual_given_primal(
    const Model& m, const Trajectory<typename Model::Primal>& x_traj,
    const typename Model::Dual& init, const ExplosionPolicy& policy, SeedSpec seed) {
  RecordedPrimal<typename Model::Primal> src(x_traj);
  CounterRng rng(seed);
  return run_coupled(m, x_traj.states.front(), init, src, policy, rng);
}

// Draws X*_0 = x* with probability mu0*(x*) Lambda(x*, x0) / mu0(x0).
template <class Model>
typename Model::Dual draw_initial_dual(
    const Model& m, const std::vector<std::pair<typename Model::Dual, double>>& mu0_star,
    const typename Model::Primal& x0, CounterRng& rng) {
  std::vector<double> w;
  double total = 0;
  for (const auto& [d, p] : mu0_star) {
    const Real l = m.log_lambda(d, x0);
    w.push_back(l == kLogZero ? 0.0 : p * static_cast<double>(std::exp(l)));
    total += w.back();
  }
  if (!(total > 0)) {
    throw Error(ErrorCode::kInconsistentInput, "no initial dual state contains x0");
  }
  return mu0_star[pick(w, total, rng.uniform())].first;
}

}  // namespace sstlab
