#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sstlab/graph_model.hpp"
#include "sstlab/rng.hpp"
#include "sstlab/stratified.hpp"

namespace sstlab {

struct BranchExtent {
  enum class Kind : std::uint8_t { kEmpty, kPrefix, kSegment, kHalfSegment, kFull };
  Kind kind = Kind::kEmpty;
  std::int64_t a = 0;  // first index (Segment, HalfSegment)
  std::int64_t b = 0;  // last index (Prefix, Segment)

  static BranchExtent empty() { return {}; }
  static BranchExtent prefix(std::int64_t k) { return {Kind::kPrefix, 0, k}; }
  static BranchExtent segment(std::int64_t a, std::int64_t b) { return {Kind::kSegment, a, b}; }
  static BranchExtent half_segment(std::int64_t a) { return {Kind::kHalfSegment, a, 0}; }
  static BranchExtent full() { return {Kind::kFull, 0, 0}; }

  bool has_delta() const { return kind == Kind::kFull || kind == Kind::kHalfSegment; }
  bool contains(std::int64_t k) const;
  auto operator<=>(const BranchExtent&) const = default;
};

// Connected compact subset of the compactified graph: either a nonempty
// set of center vertices with per-branch Empty/Prefix/Full extents, or
// (empty center) a single branch piece given as a Segment or HalfSegment.
struct DualSet {
  std::uint64_t center = 0;
  std::vector<BranchExtent> ext;

  bool branch_mode() const { return center == 0; }
  int stratum() const;
  auto operator<=>(const DualSet&) const = default;
};

// Text form "C:<hex mask>;B1:<extent>;..." with extents "-" (empty), "P<k>",
// "F", "S<a>-<b>" and "H<a>". Stable, used in CSV logs.
std::string encode(const DualSet& q);
DualSet parse_dual_set(const std::string& text, int branches);

// Vertex of the primal graph: branch -1 is the center (index = vertex id),
// otherwise index is the depth k of phi_branch(k).
struct GraphVertex {
  int branch = -1;
  std::int64_t index = 0;
  auto operator<=>(const GraphVertex&) const = default;
};
std::string encode(const GraphVertex& v);

class GraphDualModel {
 public:
  using Primal = GraphVertex;
  using Dual = DualSet;

  static constexpr std::int64_t kDefaultDepth = 16384;

  explicit GraphDualModel(GraphModel g, std::int64_t depth = kDefaultDepth,
                          const TailOptions& opts = {});

  const GraphModel& graph() const { return g_; }
  const GraphMeasure& measure() const { return mu_; }
  std::int64_t depth() const { return depth_; }
  Real log_mass(const DualSet& q) const;
  Real log_weight(const GraphVertex& v) const;
  DualSet full() const;
  DualSet singleton(const GraphVertex& v) const;
  bool contains(const DualSet& q, const GraphVertex& v) const;
  bool connected(const DualSet& q) const;  // flood-fill check of the canonical form

  std::vector<std::pair<GraphVertex, Real>> primal_moves(const GraphVertex& x) const;
  std::vector<std::pair<DualSet, Real>> dual_moves(const DualSet& q) const;
  Real log_lambda(const DualSet& q, const GraphVertex& x) const;
  std::optional<std::vector<GraphVertex>> lambda_support(const DualSet& q) const;
  bool is_absorbing(const DualSet& q) const;
  int stratum(const DualSet& q) const { return q.stratum(); }
  bool within_tables(const DualSet& q) const;
  std::optional<ExplosionOutcome<DualSet>> try_explode(const DualSet& q,
                                                       const ExplosionPolicy& policy,
                                                       CounterRng& rng) const;
  GraphVertex sample_lambda(const DualSet& q, CounterRng& rng) const;
  // Outward moves along a branch whose tail lies in q, see IntervalModel.
  bool negligible_excursion(const GraphVertex& x, const GraphVertex& y, const DualSet& q,
                            double budget) const;

 private:
  GraphModel g_;
  std::int64_t depth_;
  GraphMeasure mu_;

  Real log_extent_mass(int i, const BranchExtent& e) const;
  void add_center_mode_moves(const DualSet& q, Real m,
                             std::vector<std::pair<DualSet, Real>>& out) const;
  void add_branch_mode_moves(const DualSet& q, Real m,
                             std::vector<std::pair<DualSet, Real>>& out) const;
};

// dual_transitions is the free-function form of GraphDualModel::dual_moves;
// throws kAbsorbedState on the full set.
std::vector<std::pair<DualSet, Real>> dual_transitions(const DualSet& q,
                                                       const GraphDualModel& model);

// Comparison birth-death rates along branch i (natural logs). Without a
// base, the L^i chain on the sets G^i_p (everything except phi_i beyond p);
// with base n, the L^{i,n} chain on the segments phi_i([n, p]).
struct BranchComparisonRates {
  int branch = 0;
  std::optional<std::int64_t> base;
  std::int64_t first = 0;        // smallest index p
  std::vector<Real> log_up;      // log L_{p,p+1}, p = first, first+1, ...
  std::vector<Real> log_down;    // log L_{p,p-1}, p = first, first+1, ... (kLogZero at first)
};

BranchComparisonRates branch_comparison(int i, std::optional<std::int64_t> base,
                                        std::int64_t last, const GraphDualModel& model);

DualTrajectory<DualSet> simulate_dual_graph(const GraphDualModel& model, const DualSet& init,
                                            double horizon, const ExplosionPolicy& policy,
                                            SeedSpec seed);

// CSV: time, state encoding, stratum, event.
void write_dual_csv(std::ostream& os, const DualTrajectory<DualSet>& tr);

}  // namespace sstlab
