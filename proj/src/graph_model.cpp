#include "sstlab/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <string>

#include "sstlab/error.hpp"

namespace sstlab {

GraphModel::GraphModel(std::vector<std::string> center_names,
                       std::vector<RawEdge> center_edges,
                       std::vector<Branch> branches)
    : names_(std::move(center_names)), edges_(std::move(center_edges)),
      branches_(std::move(branches)) {
  const int n = center_size();
  if (n == 0) throw Error(ErrorCode::kEmptyCenter, "graph has no center");
  if (n > kMaxCenter) {
    throw Error(ErrorCode::kInvalidModel,
                "center has " + std::to_string(n) + " vertices, limit is 64");
  }
  log_rate_.assign(static_cast<size_t>(n) * n, kLogZero);
  adj_.assign(n, 0);
  for (const RawEdge& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v) {
      throw Error(ErrorCode::kInvalidModel, "bad center edge");
    }
    if (!(e.rate_uv > 0) || !(e.rate_vu > 0)) {
      throw Error(ErrorCode::kInvalidModel, "edge rates must be positive");
    }
    if (adj_[e.u] >> e.v & 1) {
      throw Error(ErrorCode::kInvalidModel, "duplicate edge");
    }
    log_rate_[e.u * n + e.v] = std::log(static_cast<Real>(e.rate_uv));
    log_rate_[e.v * n + e.u] = std::log(static_cast<Real>(e.rate_vu));
    adj_[e.u] |= std::uint64_t{1} << e.v;
    adj_[e.v] |= std::uint64_t{1} << e.u;
  }
  for (const Branch& b : branches_) {
    if (b.attach < 0 || b.attach >= n) {
      throw Error(ErrorCode::kInvalidModel, "branch attached outside the center");
    }
  }
  if (branches_.empty()) {
    throw Error(ErrorCode::kInvalidModel, "graph needs at least one infinite branch");
  }
  // Connectivity of the center.
  std::uint64_t seen = 1, frontier = 1;
  while (frontier) {
    std::uint64_t next = 0;
    for (int v = 0; v < n; ++v) {
      if (frontier >> v & 1) next |= adj_[v];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  if (seen != full_center_mask()) {
    throw Error(ErrorCode::kInvalidModel, "center is not connected");
  }
}

std::uint64_t GraphModel::full_center_mask() const {
  return center_size() == 64 ? ~std::uint64_t{0}
                             : (std::uint64_t{1} << center_size()) - 1;
}

GraphModel compute_center(const RawGraph& raw) {
  const int n = static_cast<int>(raw.names.size());
  if (n == 0) throw Error(ErrorCode::kInvalidModel, "graph has no vertices");
  if (raw.rays.empty()) {
    throw Error(ErrorCode::kInvalidModel, "graph needs at least one ray");
  }
  // Neighbor lists: entries >= 0 are vertices, entries < 0 encode ray -(r+1).
  std::vector<std::vector<int>> nbr(n);
  std::set<std::pair<int, int>> seen_edges;
  for (const RawEdge& e : raw.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw Error(ErrorCode::kInvalidModel, "edge references an unknown vertex");
    }
    if (e.u == e.v) throw Error(ErrorCode::kInvalidModel, "self-loop");
    if (!seen_edges.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second) {
      throw Error(ErrorCode::kInvalidModel, "duplicate edge");
    }
    nbr[e.u].push_back(e.v);
    nbr[e.v].push_back(e.u);
  }
  for (size_t r = 0; r < raw.rays.size(); ++r) {
    const int a = raw.rays[r].attach;
    if (a < 0 || a >= n) {
      throw Error(ErrorCode::kInvalidModel, "ray attached to an unknown vertex");
    }
    nbr[a].push_back(-static_cast<int>(r) - 1);
  }
  // Connectivity (rays hang off vertices, so vertices suffice).
  {
    std::vector<char> vis(n, 0);
    std::deque<int> q{0};
    vis[0] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : nbr[v]) {
        if (w >= 0 && !vis[w]) {
          vis[w] = 1;
          q.push_back(w);
        }
      }
    }
    if (std::count(vis.begin(), vis.end(), 1) != n) {
      throw Error(ErrorCode::kInvalidModel, "graph is not connected");
    }
  }
  std::vector<char> hub(n);
  bool any_hub = false;
  for (int v = 0; v < n; ++v) {
    hub[v] = nbr[v].size() != 2;
    any_hub = any_hub || hub[v];
  }
  if (!any_hub) {
    throw Error(ErrorCode::kEmptyCenter,
                "every vertex has degree 2: the graph is a line, use the interval dual");
  }

  auto rate = [&](int u, int v) {
    for (const RawEdge& e : raw.edges) {
      if (e.u == u && e.v == v) return e.rate_uv;
      if (e.u == v && e.v == u) return e.rate_vu;
    }
    return 0.0;
  };

  std::vector<char> in_center = hub;
  std::vector<char> visited = hub;
  struct PendingBranch {
    int attach;
    std::vector<int> chain;
  };
  std::map<int, PendingBranch> by_ray;
  for (int h = 0; h < n; ++h) {
    if (!hub[h]) continue;
    for (int first : nbr[h]) {
      if (first < 0) {
        by_ray[-first - 1] = {h, {}};
        continue;
      }
      if (hub[first]) continue;
      // Walk the chain of degree-2 vertices starting at `first`.
      std::vector<int> chain;
      int prev = h, cur = first;
      int end = 0;  // >= 0 hub, < 0 ray
      while (true) {
        chain.push_back(cur);
        int next = nbr[cur][0] == prev ? nbr[cur][1] : nbr[cur][0];
        if (next < 0 || hub[next]) {
          end = next;
          break;
        }
        prev = cur;
        cur = next;
      }
      for (int v : chain) visited[v] = 1;
      if (end < 0) {
        by_ray[-end - 1] = {h, chain};
      } else if (end == h) {
        throw Error(ErrorCode::kInvalidModel,
                    "a cycle through vertex '" + raw.names[h] +
                        "' lies outside the center and is not a branch");
      } else {
        for (int v : chain) in_center[v] = 1;
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!visited[v]) {
      throw Error(ErrorCode::kInvalidModel, "vertex '" + raw.names[v] +
                                                "' is not reachable from the center");
    }
  }

  std::vector<int> index(n, -1);
  std::vector<std::string> names;
  for (int v = 0; v < n; ++v) {
    if (in_center[v]) {
      index[v] = static_cast<int>(names.size());
      names.push_back(raw.names[v]);
    }
  }
  std::vector<RawEdge> edges;
  for (const RawEdge& e : raw.edges) {
    if (in_center[e.u] && in_center[e.v]) {
      edges.push_back({index[e.u], index[e.v], e.rate_uv, e.rate_vu});
    }
  }
  std::vector<Branch> branches;
  for (size_t r = 0; r < raw.rays.size(); ++r) {
    const RawRay& ray = raw.rays[r];
    const PendingBranch& pb = by_ray.at(static_cast<int>(r));
    Branch b;
    b.attach = index[pb.attach];
    if (pb.chain.empty()) {
      b.log_attach_out = std::log(static_cast<Real>(ray.attach_out));
      b.log_attach_in = std::log(static_cast<Real>(ray.attach_in));
      b.rates = ray.rates;
    } else {
      const auto& c = pb.chain;
      b.log_attach_out = std::log(static_cast<Real>(rate(pb.attach, c[0])));
      b.log_attach_in = std::log(static_cast<Real>(rate(c[0], pb.attach)));
      std::vector<double> out, in;
      for (size_t j = 0; j + 1 < c.size(); ++j) {
        out.push_back(rate(c[j], c[j + 1]));
        in.push_back(rate(c[j + 1], c[j]));
      }
      out.push_back(ray.attach_out);
      in.push_back(ray.attach_in);
      b.rates = ray.rates.with_prefix(out, in);
      for (int v : c) b.absorbed.push_back(raw.names[v]);
    }
    branches.push_back(std::move(b));
  }
  return GraphModel(std::move(names), std::move(edges), std::move(branches));
}

GraphMeasure mu_graph(const GraphModel& g, std::int64_t branch_cutoff,
                      const TailOptions& opts) {
  const int n = g.center_size();
  GraphMeasure m;
  m.center.assign(n, kLogZero);
  m.center[0] = 0;
  std::deque<int> q{0};
  std::vector<char> done(n, 0);
  done[0] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w = 0; w < n; ++w) {
      if (!(g.center_neighbors(v) >> w & 1) || done[w]) continue;
      m.center[w] = m.center[v] + g.log_center_rate(v, w) - g.log_center_rate(w, v);
      done[w] = 1;
      q.push_back(w);
    }
  }
  for (const RawEdge& e : g.center_edges()) {
    const Real lhs = m.center[e.u] + g.log_center_rate(e.u, e.v);
    const Real rhs = m.center[e.v] + g.log_center_rate(e.v, e.u);
    if (std::abs(lhs - rhs) > 1e-9L) {
      throw Error(ErrorCode::kInconsistentReversibility,
                  "detailed balance fails on edge " + g.name(e.u) + "-" + g.name(e.v) +
                      " (cycle rate ratio " +
                      std::to_string(static_cast<double>(std::exp(lhs - rhs))) + ")");
    }
  }
  Real total = kLogZero;
  for (Real w : m.center) total = log_add(total, w);
  for (int i = 0; i < g.branch_count(); ++i) {
    const Branch& b = g.branch(i);
    std::vector<Real> w(static_cast<size_t>(branch_cutoff) + 1);
    w[0] = m.center[b.attach] + b.log_attach_out - b.log_attach_in;
    for (std::int64_t k = 1; k <= branch_cutoff; ++k) {
      w[k] = w[k - 1] + b.rates.log_out(k - 1) - b.rates.log_in(k);
    }
    std::int64_t k = branch_cutoff;
    Real acc = w[branch_cutoff];
    Real tail = log_tail_sum(
        [&](std::int64_t) {
          acc += b.rates.log_out(k) - b.rates.log_in(k + 1);
          ++k;
          return acc;
        },
        opts);
    m.branches.emplace_back(0, std::move(w), kLogZero, tail);
    total = log_add(total, m.branches.back().log_total());
  }
  m.log_total = total;
  return m;
}

HalfLineRates branch_as_half_line(const Branch& b) {
  return b.rates.with_prefix({static_cast<double>(std::exp(b.log_attach_out))},
                             {static_cast<double>(std::exp(b.log_attach_in))});
}

}  // namespace sstlab
