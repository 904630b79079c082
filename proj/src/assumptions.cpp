#include "sstlab/assumptions.hpp"

#include "sstlab/error.hpp"

namespace sstlab {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kHolds: return "Holds";
    case Verdict::kFails: return "Fails";
    case Verdict::kInconclusive: return "Inconclusive";
  }
  return "?";
}

HalfLineView half_line_view(const BDRates& rates, int side) {
  if (side > 0) {
    return {[&rates](std::int64_t k) {
              return rates.in_support(k + 1) ? rates.log_birth(k) : kLogZero;
            },
            [&rates](std::int64_t k) {
              return rates.in_support(k) ? rates.log_death(k) : kLogZero;
            }};
  }
  return {[&rates](std::int64_t k) {
            return rates.in_support(-k - 1) ? rates.log_death(-k) : kLogZero;
          },
          [&rates](std::int64_t k) {
            return rates.in_support(-k) ? rates.log_birth(-k) : kLogZero;
          }};
}

HalfLineView branch_view(const Branch& b) {
  // Index 0 is phi(0); mu is taken relative to phi(0).
  return {[&b](std::int64_t k) { return b.rates.log_out(k); },
          [&b](std::int64_t k) { return b.rates.log_in(k); }};
}

namespace {

struct SideChecks {
  SeriesEvidence recurrent, explosive, diag;
};

// Series over k >= 1 (recurrence, diagonal) or k >= 0 (explosion) of a
// half-line with mu(0) = 1. A side of finite length gives zero terms.
SideChecks check_side(const HalfLineView& v, bool has_side,
                      const SeriesOptions& opts) {
  SideChecks out;
  if (!has_side) {
    auto zero = [](std::int64_t) { return kLogZero; };
    out.recurrent = classify_series(zero, opts);
    out.diag = out.recurrent;
    out.explosive = out.recurrent;
    return out;
  }
  {
    Real lm = 0;
    out.recurrent = classify_series(
        [&](std::int64_t k) {
          if (lm == kLogZero) return kLogZero;
          const Real o = v.log_out(k - 1);
          lm = o == kLogZero ? kLogZero : lm + o - v.log_in(k);
          return lm;
        },
        opts);
  }
  {
    Real lm = 0;
    out.diag = classify_series(
        [&](std::int64_t k) {
          if (lm == kLogZero) return kLogZero;
          const Real o = v.log_out(k - 1);
          if (o == kLogZero) return lm = kLogZero;
          lm += o - v.log_in(k);
          return lm + log_add(v.log_in(k), v.log_out(k));
        },
        opts);
  }
  {
    // Term n-1 of sum_{n>=0} (1/(mu(n) out(n))) sum_{m=0}^{n} mu(m).
    Real lm = 0, cum = 0;
    bool ended = false;
    out.explosive = classify_series(
        [&](std::int64_t k) {
          const std::int64_t n = k - 1;
          if (ended) return kLogZero;
          if (n > 0) {
            lm += v.log_out(n - 1) - v.log_in(n);
            cum = log_add(cum, lm);
          }
          const Real o = v.log_out(n);
          if (o == kLogZero) {
            ended = true;
            return kLogZero;
          }
          return cum - lm - o;
        },
        opts);
  }
  return out;
}

Verdict combine(const std::vector<SeriesEvidence>& ev, bool want_converge,
                bool finite_counts_as_divergent = false) {
  bool any_fail = false, any_unknown = false;
  for (const SeriesEvidence& e : ev) {
    SeriesVerdict v = e.verdict;
    if (finite_counts_as_divergent && e.log_last_term == kLogZero &&
        v == SeriesVerdict::kConverges) {
      // A side of finite length cannot explode.
      continue;
    }
    if (v == SeriesVerdict::kInconclusive) {
      any_unknown = true;
    } else if ((v == SeriesVerdict::kConverges) != want_converge) {
      any_fail = true;
    }
  }
  if (any_fail) return Verdict::kFails;
  if (any_unknown) return Verdict::kInconclusive;
  return Verdict::kHolds;
}

AssumptionReport assemble(const std::vector<SideChecks>& sides) {
  AssumptionReport r;
  for (const SideChecks& s : sides) {
    r.positive_recurrent.evidence.push_back(s.recurrent);
    r.nonexplosive.evidence.push_back(s.explosive);
    r.diag_integrable.evidence.push_back(s.diag);
  }
  r.positive_recurrent.verdict = combine(r.positive_recurrent.evidence, true);
  r.nonexplosive.verdict = combine(r.nonexplosive.evidence, false, true);
  r.diag_integrable.verdict = combine(r.diag_integrable.evidence, true);
  return r;
}

}  // namespace

AssumptionReport check_assumptions(const BDRates& rates, const SeriesOptions& opts) {
  std::vector<SideChecks> sides;
  sides.push_back(check_side(half_line_view(rates, +1), rates.hi() > 0, opts));
  sides.push_back(check_side(half_line_view(rates, -1), rates.lo() < 0, opts));
  return assemble(sides);
}

AssumptionReport check_assumptions(const GraphModel& graph, const SeriesOptions& opts) {
  std::vector<SideChecks> sides;
  for (const Branch& b : graph.branches()) {
    sides.push_back(check_side(branch_view(b), true, opts));
  }
  return assemble(sides);
}

}  // namespace sstlab
