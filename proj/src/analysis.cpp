#include "sstlab/analysis.hpp"

#include <bit>
#include <cstdio>

#include <boost/math/special_functions/gamma.hpp>

namespace sstlab {

CriterionSide criterion_side(const HalfLineView& v, std::string label,
                             const CriterionOptions& opts) {
  CriterionSide side;
  side.label = std::move(label);
  // lm = log mu(i) relative to mu(0); inner = log sum_{j<=i} 1/(mu(j) out(j)).
  Real lm = kLogZero, inner = kLogZero, partial = kLogZero;
  const Real o0 = v.log_out(0);
  if (o0 != kLogZero) lm = o0 - v.log_in(1);
  bool ended = lm == kLogZero;
  side.evidence = classify_series(
      [&](std::int64_t i) {
        Real term = kLogZero;
        if (!ended) {
          const Real o = v.log_out(i);
          if (o == kLogZero) {
            ended = true;
          } else {
            inner = log_add(inner, -lm - o);
            lm += o - v.log_in(i + 1);
            term = lm + inner;
          }
        }
        partial = log_add(partial, term);
        if (side.terms.size() < opts.record_terms) {
          side.terms.push_back(static_cast<double>(std::exp(term)));
          side.partial_sums.push_back(static_cast<double>(std::exp(partial)));
        }
        return term;
      },
      opts.series);
  return side;
}

namespace {

SeriesVerdict combine(const std::vector<CriterionSide>& sides) {
  bool unknown = false;
  for (const CriterionSide& s : sides) {
    if (s.evidence.verdict == SeriesVerdict::kDiverges) return SeriesVerdict::kDiverges;
    if (s.evidence.verdict == SeriesVerdict::kInconclusive) unknown = true;
  }
  return unknown ? SeriesVerdict::kInconclusive : SeriesVerdict::kConverges;
}

void finish(CriterionReport& r) {
  r.verdict = combine(r.sides);
  r.flagged = r.assumptions.positive_recurrent.verdict != Verdict::kHolds ||
              r.assumptions.nonexplosive.verdict != Verdict::kHolds;
}

}  // namespace

CriterionReport criterion(const BDRates& rates, const CriterionOptions& opts) {
  CriterionReport r;
  if (rates.hi() > 0) r.sides.push_back(criterion_side(half_line_view(rates, +1), "right", opts));
  if (rates.lo() < 0) r.sides.push_back(criterion_side(half_line_view(rates, -1), "left", opts));
  r.assumptions = check_assumptions(rates);
  finish(r);
  return r;
}

CriterionReport criterion(const GraphModel& graph, const CriterionOptions& opts) {
  CriterionReport r;
  for (int i = 0; i < graph.branch_count(); ++i) {
    r.sides.push_back(
        criterion_side(branch_view(graph.branch(i)), "branch " + std::to_string(i + 1), opts));
  }
  r.assumptions = check_assumptions(graph);
  finish(r);
  return r;
}

Truncation truncate_line(const BDRates& rates, std::int64_t lo, std::int64_t hi) {
  if (lo > hi || !rates.in_support(lo) || !rates.in_support(hi)) {
    throw Error(ErrorCode::kInvalidArgument, "window must be a nonempty part of the support");
  }
  Truncation tr;
  tr.L = truncate_bd(rates, lo, hi);
  const MassTable mu = mu_bd(rates, lo, hi);
  const std::int64_t n = hi - lo + 1;
  tr.pi.resize(n);
  long double kept = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    const Real w = std::exp(mu.log_weight(lo + k) - mu.log_total());
    tr.pi[k] = static_cast<double>(w);
    kept += w;
    tr.labels.push_back(std::to_string(lo + k));
  }
  tr.tail_mass = std::max(0.0, static_cast<double>(1 - kept));
  return tr;
}

Truncation truncate_graph(const GraphModel& g, std::int64_t depth) {
  if (depth < 0) throw Error(ErrorCode::kInvalidArgument, "depth must be nonnegative");
  const GraphMeasure mu = mu_graph(g, depth);
  const int nc = g.center_size();
  const int nb = g.branch_count();
  const std::int64_t n = nc + nb * (depth + 1);
  auto idx = [&](int branch, std::int64_t k) { return nc + branch * (depth + 1) + k; };
  Truncation tr;
  tr.L = Generator::Zero(n, n);
  tr.pi.resize(n);
  long double kept = 0;
  auto set_pi = [&](std::int64_t i, Real lw) {
    const Real w = std::exp(lw - mu.log_total);
    tr.pi[i] = static_cast<double>(w);
    kept += w;
  };
  for (int v = 0; v < nc; ++v) {
    tr.labels.push_back(g.name(v));
    set_pi(v, mu.center[v]);
    for (std::uint64_t m = g.center_neighbors(v); m; m &= m - 1) {
      const int u = std::countr_zero(m);
      tr.L(v, u) = static_cast<double>(std::exp(g.log_center_rate(v, u)));
    }
  }
  for (int i = 0; i < nb; ++i) {
    const Branch& b = g.branch(i);
    tr.L(b.attach, idx(i, 0)) = static_cast<double>(std::exp(b.log_attach_out));
    tr.L(idx(i, 0), b.attach) = static_cast<double>(std::exp(b.log_attach_in));
    for (std::int64_t k = 0; k <= depth; ++k) {
      tr.labels.push_back("b" + std::to_string(i + 1) + ":" + std::to_string(k));
      set_pi(idx(i, k), mu.branches[i].log_weight(k));
      if (k < depth) {
        tr.L(idx(i, k), idx(i, k + 1)) = static_cast<double>(std::exp(b.rates.log_out(k)));
        tr.L(idx(i, k + 1), idx(i, k)) = static_cast<double>(std::exp(b.rates.log_in(k + 1)));
      }
    }
  }
  for (std::int64_t i = 0; i < n; ++i) tr.L(i, i) = -tr.L.row(i).sum();
  tr.tail_mass = std::max(0.0, static_cast<double>(1 - kept));
  return tr;
}

SeparationCurve separation_curve(const Truncation& tr, const Eigen::VectorXd& mu0,
                                 const std::vector<double>& grid, double max_tail_mass) {
  if (tr.tail_mass > max_tail_mass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "stationary mass %.3g outside the window exceeds %.0e",
                  tr.tail_mass, max_tail_mass);
    throw Error(ErrorCode::kWindowTooSmall, buf);
  }
  if (mu0.size() != tr.pi.size()) {
    throw Error(ErrorCode::kInvalidArgument, "initial law does not match the window");
  }
  SeparationCurve c;
  c.tail_mass = tr.tail_mass;
  c.window = tr.labels.front() + ".." + tr.labels.back();
  for (double t : grid) {
    const Eigen::VectorXd mt = t == 0 ? mu0 : transient_distribution(tr.L, mu0, t);
    double s = -kInf;
    for (Eigen::Index k = 0; k < mt.size(); ++k) s = std::max(s, 1 - mt[k] / tr.pi[k]);
    if (!c.points.empty() && t >= c.points.back().t && s > c.points.back().separation + 1e-9) {
      c.monotone = false;
    }
    c.points.push_back({t, s});
  }
  return c;
}

Interval wilson(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0) return {0, 1};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ChiSquare chi_square(const std::vector<double>& probs, const std::vector<std::int64_t>& counts,
                     std::int64_t samples) {
  if (probs.size() != counts.size()) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities and counts differ in length");
  }
  ChiSquare r;
  r.samples = samples;
  const double n = static_cast<double>(samples);
  std::vector<std::pair<double, double>> bins;  // expected, observed
  double pooled_e = n, pooled_o = n;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double e = n * probs[i];
    if (e >= 5) {
      bins.push_back({e, static_cast<double>(counts[i])});
      pooled_e -= e;
      pooled_o -= static_cast<double>(counts[i]);
    }
  }
  pooled_e = std::max(0.0, pooled_e);
  if (pooled_e >= 5 || bins.empty()) {
    bins.push_back({pooled_e, pooled_o});
  } else {
    auto smallest = std::min_element(bins.begin(), bins.end());
    smallest->first += pooled_e;
    smallest->second += pooled_o;
  }
  for (const auto& [e, o] : bins) {
    if (e > 0) r.statistic += (o - e) * (o - e) / e;
  }
  r.bins = static_cast<int>(bins.size());
  r.dof = r.bins - 1;
  r.p_value = r.dof > 0 ? boost::math::gamma_q(r.dof / 2.0, r.statistic / 2) : 1.0;
  return r;
}

double AbsorptionStats::cdf(double t) const {
  if (trials == 0) return 0;
  const auto k = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  return static_cast<double>(k) / static_cast<double>(trials);
}

AbsorptionStats absorption_stats(std::vector<double> times, std::int64_t trials,
                                 std::int64_t undetected, const std::vector<double>& grid) {
  AbsorptionStats s;
  std::sort(times.begin(), times.end());
  s.trials = trials;
  s.absorbed = static_cast<std::int64_t>(times.size());
  s.undetected = undetected;
  s.times = std::move(times);
  for (double t : grid) {
    const auto done = std::upper_bound(s.times.begin(), s.times.end(), t) - s.times.begin();
    const std::int64_t alive = trials - done;
    const Interval w = wilson(alive, trials, s.ci_sigma);
    s.grid.push_back({t, static_cast<double>(alive) / static_cast<double>(trials),
                      (w.hi - w.lo) / 2});
  }
  return s;
}

std::vector<double> stationary_probs(const IntervalModel& m, const std::vector<std::int64_t>& xs) {
  std::vector<double> p;
  for (std::int64_t x : xs) {
    p.push_back(static_cast<double>(std::exp(m.measure().log_weight(x) - m.measure().log_total())));
  }
  return p;
}

std::vector<double> stationary_probs(const GraphDualModel& m, const std::vector<GraphVertex>& xs) {
  std::vector<double> p;
  for (const GraphVertex& x : xs) {
    p.push_back(static_cast<double>(std::exp(m.log_weight(x) - m.measure().log_total)));
  }
  return p;
}

std::vector<BoundRow> bound_check(const SeparationCurve& sep, const AbsorptionStats& stats) {
  if (sep.points.size() != stats.grid.size()) {
    throw Error(ErrorCode::kInvalidArgument, "separation and survival grids differ");
  }
  std::vector<BoundRow> rows;
  for (size_t k = 0; k < sep.points.size(); ++k) {
    const SeparationPoint& a = sep.points[k];
    const SurvivalPoint& b = stats.grid[k];
    if (a.t != b.t) throw Error(ErrorCode::kInvalidArgument, "separation and survival grids differ");
    rows.push_back({a.t, a.separation, b.survival, b.ci, a.separation <= b.survival + 3 * b.ci,
                    std::abs(a.separation - b.survival) <= 3 * b.ci});
  }
  return rows;
}

std::function<double(const IntervalState&)> interval_count(std::int64_t k) {
  return [k](const IntervalState& q) {
    const std::int64_t lo = std::max(q.p, -k), hi = std::min(q.q, k);
    return static_cast<double>(std::min(std::max<std::int64_t>(hi - lo + 1, 0), k));
  };
}

std::function<double(const DualSet&)> graph_count(const GraphDualModel& m, std::int64_t k) {
  const int branches = m.graph().branch_count();
  return [k, branches](const DualSet& q) {
    std::int64_t n = std::popcount(q.center);
    for (int i = 0; i < branches; ++i) {
      for (std::int64_t j = 0; j < k; ++j) n += q.ext[i].contains(j) ? 1 : 0;
    }
    return static_cast<double>(std::min(n, k));
  };
}

MeanEstimate mean_estimate(const std::vector<double>& xs) {
  MeanEstimate e;
  double m2 = 0;
  for (double x : xs) {
    ++e.n;
    const double d = x - e.mean;
    e.mean += d / static_cast<double>(e.n);
    m2 += d * (x - e.mean);
  }
  e.sd = e.n > 1 ? std::sqrt(m2 / static_cast<double>(e.n - 1)) : 0;
  return e;
}

}  // namespace sstlab

namespace sstlab {

std::vector<IntervalState> enumerate_intervals(const IntervalModel& m, std::int64_t lo,
                                               std::int64_t hi) {
  lo = std::max(lo, m.rates().lo());
  hi = std::min(hi, m.rates().hi());
  std::vector<IntervalState> out;
  for (std::int64_t p = lo; p <= hi; ++p) {
    for (std::int64_t q = p; q <= hi; ++q) out.push_back({p, q});
  }
  return out;
}

ResidualReport duality_check(const IntervalModel& m, std::int64_t lo, std::int64_t hi) {
  const auto duals = enumerate_intervals(m, lo, hi);
  std::vector<std::int64_t> cols;
  for (std::int64_t x = std::max(lo - 2, m.rates().lo()); x <= std::min(hi + 2, m.rates().hi());
       ++x) {
    cols.push_back(x);
  }
  return algebraic_residual(m, duals, cols, [](const IntervalState& q, std::int64_t p) {
    return encode(q) + " at " + std::to_string(p);
  });
}

std::vector<DualSet> enumerate_dual_sets(const GraphDualModel& m, std::int64_t depth) {
  const GraphModel& g = m.graph();
  const int n = g.center_size();
  const int nb = g.branch_count();
  if (n > 20) throw Error(ErrorCode::kInvalidArgument, "center too large to enumerate");
  std::vector<DualSet> out;
  DualSet q;
  q.ext.assign(nb, BranchExtent::empty());
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    q.center = mask;
    for (int i = 0; i < nb; ++i) q.ext[i] = BranchExtent::empty();
    if (!m.connected(q)) continue;
    // Odometer over the extents of branches attached inside the mask.
    std::vector<int> open;
    for (int i = 0; i < nb; ++i) {
      if (mask >> g.branch(i).attach & 1) open.push_back(i);
    }
    std::vector<std::int64_t> k(open.size(), -1);  // -1 = empty, else prefix length
    while (true) {
      for (size_t j = 0; j < open.size(); ++j) {
        q.ext[open[j]] = k[j] < 0 ? BranchExtent::empty() : BranchExtent::prefix(k[j]);
      }
      out.push_back(q);
      size_t j = 0;
      while (j < open.size() && k[j] == depth) k[j++] = -1;
      if (j == open.size()) break;
      ++k[j];
    }
  }
  for (int i = 0; i < nb; ++i) {
    for (std::int64_t a = 0; a <= depth; ++a) {
      for (std::int64_t b = a; b <= depth; ++b) {
        DualSet s;
        s.ext.assign(nb, BranchExtent::empty());
        s.ext[i] = BranchExtent::segment(a, b);
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

ResidualReport duality_check(const GraphDualModel& m, std::int64_t depth) {
  const auto duals = enumerate_dual_sets(m, depth);
  std::vector<GraphVertex> cols;
  for (int v = 0; v < m.graph().center_size(); ++v) cols.push_back({-1, v});
  for (int i = 0; i < m.graph().branch_count(); ++i) {
    for (std::int64_t k = 0; k <= depth + 2; ++k) cols.push_back({i, k});
  }
  return algebraic_residual(m, duals, cols, [](const DualSet& q, const GraphVertex& p) {
    return encode(q) + " at " + encode(p);
  });
}

}  // namespace sstlab
