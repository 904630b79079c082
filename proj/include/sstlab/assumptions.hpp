#pragma once

#include <string>
#include <vector>

#include "sstlab/graph_model.hpp"
#include "sstlab/rates.hpp"
#include "sstlab/series.hpp"

namespace sstlab {

enum class Verdict { kHolds, kFails, kInconclusive };
const char* verdict_name(Verdict v);

struct AssumptionCheck {
  Verdict verdict = Verdict::kInconclusive;
  // One entry per half-line (right, left) or per branch.
  std::vector<SeriesEvidence> evidence;
};

struct AssumptionReport {
  AssumptionCheck positive_recurrent;  // sum mu < inf
  AssumptionCheck nonexplosive;        // sum (1/(mu(n) out(n))) sum_{m<=n} mu(m) = inf
  AssumptionCheck diag_integrable;     // sum mu(n) (a_n + b_n) < inf

  bool all_hold() const {
    return positive_recurrent.verdict == Verdict::kHolds &&
           nonexplosive.verdict == Verdict::kHolds &&
           diag_integrable.verdict == Verdict::kHolds;
  }
};

// Half-line view: log mu relative to index 0, outward and inward rates.
// Index 0 is the origin of the Z line or the attach vertex of a branch.
struct HalfLineView {
  std::function<Real(std::int64_t)> log_out;  // k >= 0
  std::function<Real(std::int64_t)> log_in;   // k >= 1
};

AssumptionReport check_assumptions(const BDRates& rates, const SeriesOptions& opts = {});
AssumptionReport check_assumptions(const GraphModel& graph, const SeriesOptions& opts = {});

// Half-line views used by the assumption checks and the criterion.
// side = +1 for the right half-line, -1 for the left one.
HalfLineView half_line_view(const BDRates& rates, int side);
HalfLineView branch_view(const Branch& b);

}  // namespace sstlab
