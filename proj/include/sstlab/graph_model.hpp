#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sstlab/measure.hpp"
#include "sstlab/numeric.hpp"
#include "sstlab/rates.hpp"

namespace sstlab {

// Graph as written in a config: finitely many named vertices, rated edges
// and infinite rays. A ray attached at vertex v is a half-line r_0, r_1, ...
// with r_0 adjacent to v; its rates use the HalfLineRates convention
// (out(k) = L_{r_k, r_{k+1}}, in(k) = L_{r_k, r_{k-1}}).
struct RawEdge {
  int u = 0, v = 0;
  double rate_uv = 0, rate_vu = 0;
};

struct RawRay {
  int attach = 0;
  double attach_out = 0;  // L_{v, r_0}
  double attach_in = 0;   // L_{r_0, v}
  HalfLineRates rates;
};

struct RawGraph {
  std::vector<std::string> names;
  std::vector<RawEdge> edges;
  std::vector<RawRay> rays;
};

// Infinite branch i: phi(0), phi(1), ... attached to center vertex `attach`.
struct Branch {
  int attach = 0;
  Real log_attach_out = 0;  // L_{q_i, phi(0)}
  Real log_attach_in = 0;   // L_{phi(0), q_i}
  HalfLineRates rates;      // out(k) = L_{phi(k),phi(k+1)}, in(k) = L_{phi(k),phi(k-1)}
  std::vector<std::string> absorbed;  // finite vertices that became phi(0..m-1)
};

inline constexpr int kMaxCenter = 64;

class GraphModel {
 public:
  GraphModel(std::vector<std::string> center_names,
             std::vector<RawEdge> center_edges, std::vector<Branch> branches);

  int center_size() const { return static_cast<int>(names_.size()); }
  int branch_count() const { return static_cast<int>(branches_.size()); }
  const std::string& name(int v) const { return names_[v]; }
  const Branch& branch(int i) const { return branches_[i]; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<RawEdge>& center_edges() const { return edges_; }

  // log L_{u,v} between center vertices, kLogZero when not adjacent.
  Real log_center_rate(int u, int v) const { return log_rate_[u * center_size() + v]; }
  std::uint64_t center_neighbors(int v) const { return adj_[v]; }
  std::uint64_t full_center_mask() const;

 private:
  std::vector<std::string> names_;
  std::vector<RawEdge> edges_;
  std::vector<Branch> branches_;
  std::vector<Real> log_rate_;
  std::vector<std::uint64_t> adj_;
};

// Splits a raw graph into its center (convex hull of the vertices whose
// degree differs from 2) and one branch per ray. Degree-2 vertices between
// the center and a ray are folded into that ray's branch.
GraphModel compute_center(const RawGraph& raw);

struct GraphMeasure {
  std::vector<Real> center;          // log mu on center vertices
  std::vector<MassTable> branches;   // per branch, index k = depth, right tail beyond cutoff
  Real log_total = kLogZero;

  Real log_branch(int i, std::int64_t k) const { return branches[i].log_weight(k); }
};

GraphMeasure mu_graph(const GraphModel& g, std::int64_t branch_cutoff,
                      const TailOptions& opts = {});

// Rates of branch i seen as a half-line started at the attach vertex:
// index 0 is q_i and index k >= 1 is phi_i(k-1).
HalfLineRates branch_as_half_line(const Branch& b);

}  // namespace sstlab
