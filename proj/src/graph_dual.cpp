#include "sstlab/graph_dual.hpp"

#include <bit>
#include <functional>
#include <cmath>
#include <cstdio>

#include "sstlab/error.hpp"

namespace sstlab {

namespace {

using Kind = BranchExtent::Kind;

std::uint64_t bit(int v) { return std::uint64_t{1} << v; }

}  // namespace

bool BranchExtent::contains(std::int64_t k) const {
  switch (kind) {
    case Kind::kEmpty: return false;
    case Kind::kPrefix: return k >= 0 && k <= b;
    case Kind::kSegment: return k >= a && k <= b;
    case Kind::kHalfSegment: return k >= a;
    case Kind::kFull: return k >= 0;
  }
  return false;
}

int DualSet::stratum() const {
  int s = 0;
  for (const BranchExtent& e : ext) s += e.has_delta() ? 1 : 0;
  return s;
}

std::string encode(const DualSet& q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C:%llx", static_cast<unsigned long long>(q.center));
  std::string s = buf;
  for (size_t i = 0; i < q.ext.size(); ++i) {
    const BranchExtent& e = q.ext[i];
    s += ";B" + std::to_string(i + 1) + ":";
    switch (e.kind) {
      case Kind::kEmpty: s += "-"; break;
      case Kind::kPrefix: s += "P" + std::to_string(e.b); break;
      case Kind::kSegment: s += "S" + std::to_string(e.a) + "-" + std::to_string(e.b); break;
      case Kind::kHalfSegment: s += "H" + std::to_string(e.a); break;
      case Kind::kFull: s += "F"; break;
    }
  }
  return s;
}

DualSet parse_dual_set(const std::string& text, int branches) {
  auto bad = [&]() { return Error(ErrorCode::kInvalidArgument, "bad dual set '" + text + "'"); };
  DualSet q;
  q.ext.assign(branches, BranchExtent::empty());
  size_t pos = 0;
  auto next_field = [&]() {
    size_t end = text.find(';', pos);
    std::string f = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? text.size() : end + 1;
    return f;
  };
  try {
    std::string c = next_field();
    if (c.rfind("C:", 0) != 0) throw bad();
    q.center = std::stoull(c.substr(2), nullptr, 16);
    int seen = 0;
    while (pos < text.size()) {
      std::string f = next_field();
      if (f.size() < 4 || f[0] != 'B') throw bad();
      const size_t colon = f.find(':');
      const int i = std::stoi(f.substr(1, colon - 1)) - 1;
      if (i < 0 || i >= branches || colon == std::string::npos) throw bad();
      const std::string v = f.substr(colon + 1);
      BranchExtent e;
      if (v == "-") {
        e = BranchExtent::empty();
      } else if (v == "F") {
        e = BranchExtent::full();
      } else if (v[0] == 'P') {
        e = BranchExtent::prefix(std::stoll(v.substr(1)));
      } else if (v[0] == 'H') {
        e = BranchExtent::half_segment(std::stoll(v.substr(1)));
      } else if (v[0] == 'S') {
        const size_t dash = v.find('-', 1);
        if (dash == std::string::npos) throw bad();
        e = BranchExtent::segment(std::stoll(v.substr(1, dash - 1)), std::stoll(v.substr(dash + 1)));
      } else {
        throw bad();
      }
      q.ext[i] = e;
      ++seen;
    }
    if (seen != branches) throw bad();
  } catch (const std::logic_error&) {
    throw bad();
  }
  return q;
}

std::string encode(const GraphVertex& v) {
  if (v.branch < 0) return "c" + std::to_string(v.index);
  return "b" + std::to_string(v.branch + 1) + ":" + std::to_string(v.index);
}

GraphDualModel::GraphDualModel(GraphModel g, std::int64_t depth, const TailOptions& opts)
    : g_(std::move(g)), depth_(depth), mu_(mu_graph(g_, depth, opts)) {}

Real GraphDualModel::log_extent_mass(int i, const BranchExtent& e) const {
  const MassTable& t = mu_.branches[i];
  switch (e.kind) {
    case Kind::kEmpty: return kLogZero;
    case Kind::kPrefix: return t.log_mass(0, e.b);
    case Kind::kSegment: return t.log_mass(e.a, e.b);
    case Kind::kHalfSegment: return t.log_mass_from(e.a);
    case Kind::kFull: return t.log_total();
  }
  return kLogZero;
}

Real GraphDualModel::log_mass(const DualSet& q) const {
  Real s = kLogZero;
  for (std::uint64_t m = q.center; m; m &= m - 1) {
    s = log_add(s, mu_.center[std::countr_zero(m)]);
  }
  for (int i = 0; i < g_.branch_count(); ++i) s = log_add(s, log_extent_mass(i, q.ext[i]));
  return s;
}

Real GraphDualModel::log_weight(const GraphVertex& v) const {
  return v.branch < 0 ? mu_.center[v.index] : mu_.branches[v.branch].log_weight(v.index);
}

DualSet GraphDualModel::full() const {
  DualSet q;
  q.center = g_.full_center_mask();
  q.ext.assign(g_.branch_count(), BranchExtent::full());
  return q;
}

DualSet GraphDualModel::singleton(const GraphVertex& v) const {
  DualSet q;
  q.ext.assign(g_.branch_count(), BranchExtent::empty());
  if (v.branch < 0) {
    q.center = bit(static_cast<int>(v.index));
  } else {
    q.ext[v.branch] = BranchExtent::segment(v.index, v.index);
  }
  return q;
}

bool GraphDualModel::contains(const DualSet& q, const GraphVertex& v) const {
  if (v.branch < 0) return q.center >> v.index & 1;
  return q.ext[v.branch].contains(v.index);
}

bool GraphDualModel::connected(const DualSet& q) const {
  if (static_cast<int>(q.ext.size()) != g_.branch_count()) return false;
  if (q.branch_mode()) {
    int touched = 0;
    for (const BranchExtent& e : q.ext) {
      if (e.kind == Kind::kEmpty) continue;
      ++touched;
      if (e.kind == Kind::kSegment && (e.a < 0 || e.a > e.b)) return false;
      if (e.kind == Kind::kHalfSegment && e.a < 0) return false;
      if (e.kind != Kind::kSegment && e.kind != Kind::kHalfSegment) return false;
    }
    return touched == 1;
  }
  if (q.center & ~g_.full_center_mask()) return false;
  std::uint64_t seen = q.center & (~q.center + 1), frontier = seen;
  while (frontier) {
    std::uint64_t next = 0;
    for (std::uint64_t m = frontier; m; m &= m - 1) {
      next |= g_.center_neighbors(std::countr_zero(m));
    }
    next &= q.center;
    frontier = next & ~seen;
    seen |= next;
  }
  if (seen != q.center) return false;
  for (int i = 0; i < g_.branch_count(); ++i) {
    const BranchExtent& e = q.ext[i];
    if (e.kind == Kind::kEmpty) continue;
    if (e.kind == Kind::kSegment || e.kind == Kind::kHalfSegment) return false;
    if (!(q.center >> g_.branch(i).attach & 1)) return false;
    if (e.kind == Kind::kPrefix && e.b < 0) return false;
  }
  return true;
}

std::vector<std::pair<GraphVertex, Real>> GraphDualModel::primal_moves(
    const GraphVertex& x) const {
  std::vector<std::pair<GraphVertex, Real>> out;
  if (x.branch < 0) {
    const int v = static_cast<int>(x.index);
    for (std::uint64_t m = g_.center_neighbors(v); m; m &= m - 1) {
      const int u = std::countr_zero(m);
      out.push_back({{-1, u}, g_.log_center_rate(v, u)});
    }
    for (int i = 0; i < g_.branch_count(); ++i) {
      if (g_.branch(i).attach == v) out.push_back({{i, 0}, g_.branch(i).log_attach_out});
    }
    return out;
  }
  const Branch& b = g_.branch(x.branch);
  out.push_back({{x.branch, x.index + 1}, b.rates.log_out(x.index)});
  if (x.index == 0) {
    out.push_back({{-1, b.attach}, b.log_attach_in});
  } else {
    out.push_back({{x.branch, x.index - 1}, b.rates.log_in(x.index)});
  }
  return out;
}

void GraphDualModel::add_center_mode_moves(const DualSet& q, Real m,
                                           std::vector<std::pair<DualSet, Real>>& out) const {
  const int n = g_.center_size();
  auto push = [&](DualSet t, Real log_factor) {
    if (log_factor == kLogZero) return;
    const Real mt = log_mass(t);
    out.push_back({std::move(t), mt - m + log_factor});
  };
  // Growth by a center vertex.
  for (int u = 0; u < n; ++u) {
    if (q.center >> u & 1) continue;
    const std::uint64_t inside = g_.center_neighbors(u) & q.center;
    if (!inside) continue;
    Real f = kLogZero;
    for (std::uint64_t k = inside; k; k &= k - 1) {
      f = log_add(f, g_.log_center_rate(u, std::countr_zero(k)));
    }
    DualSet t = q;
    t.center |= bit(u);
    push(std::move(t), f);
  }
  // Growth and tip removal along branches.
  for (int i = 0; i < g_.branch_count(); ++i) {
    const Branch& b = g_.branch(i);
    const BranchExtent& e = q.ext[i];
    if (!(q.center >> b.attach & 1)) continue;
    if (e.kind == Kind::kEmpty) {
      DualSet t = q;
      t.ext[i] = BranchExtent::prefix(0);
      push(std::move(t), b.log_attach_in);
    } else if (e.kind == Kind::kPrefix) {
      DualSet t = q;
      t.ext[i] = BranchExtent::prefix(e.b + 1);
      push(std::move(t), b.rates.log_in(e.b + 1));
      DualSet r = q;
      r.ext[i] = e.b == 0 ? BranchExtent::empty() : BranchExtent::prefix(e.b - 1);
      push(std::move(r), b.rates.log_out(e.b));
    }
  }
  // Removal of a center vertex: one move per component of Q \ {v}.
  for (std::uint64_t mm = q.center; mm; mm &= mm - 1) {
    const int v = std::countr_zero(mm);
    Real exit = kLogZero;
    for (std::uint64_t k = g_.center_neighbors(v) & ~q.center; k; k &= k - 1) {
      exit = log_add(exit, g_.log_center_rate(v, std::countr_zero(k)));
    }
    for (int i = 0; i < g_.branch_count(); ++i) {
      if (g_.branch(i).attach == v && q.ext[i].kind == Kind::kEmpty) {
        exit = log_add(exit, g_.branch(i).log_attach_out);
      }
    }
    if (exit == kLogZero) continue;
    std::uint64_t rest = q.center & ~bit(v);
    while (rest) {
      std::uint64_t comp = rest & (~rest + 1), frontier = comp;
      while (frontier) {
        std::uint64_t next = 0;
        for (std::uint64_t k = frontier; k; k &= k - 1) {
          next |= g_.center_neighbors(std::countr_zero(k));
        }
        next &= rest;
        frontier = next & ~comp;
        comp |= next;
      }
      rest &= ~comp;
      DualSet t;
      t.center = comp;
      t.ext.assign(g_.branch_count(), BranchExtent::empty());
      for (int i = 0; i < g_.branch_count(); ++i) {
        if (comp >> g_.branch(i).attach & 1) t.ext[i] = q.ext[i];
      }
      push(std::move(t), exit);
    }
    for (int i = 0; i < g_.branch_count(); ++i) {
      const BranchExtent& e = q.ext[i];
      if (g_.branch(i).attach != v || e.kind == Kind::kEmpty) continue;
      DualSet t;
      t.ext.assign(g_.branch_count(), BranchExtent::empty());
      t.ext[i] = e.kind == Kind::kPrefix ? BranchExtent::segment(0, e.b)
                                         : BranchExtent::half_segment(0);
      push(std::move(t), exit);
    }
  }
}

void GraphDualModel::add_branch_mode_moves(const DualSet& q, Real m,
                                           std::vector<std::pair<DualSet, Real>>& out) const {
  int i = 0;
  while (q.ext[i].kind == Kind::kEmpty) ++i;
  const Branch& b = g_.branch(i);
  const BranchExtent& e = q.ext[i];
  auto push = [&](DualSet t, Real log_factor) {
    const Real mt = log_mass(t);
    out.push_back({std::move(t), mt - m + log_factor});
  };
  const bool half = e.kind == Kind::kHalfSegment;
  // Grow on the side of the attach vertex.
  if (e.a >= 1) {
    DualSet t = q;
    t.ext[i].a = e.a - 1;
    push(std::move(t), b.rates.log_out(e.a - 1));
  } else {
    DualSet t = q;
    t.center = bit(b.attach);
    t.ext[i] = half ? BranchExtent::full() : BranchExtent::prefix(e.b);
    push(std::move(t), b.log_attach_out);
  }
  if (!half) {
    DualSet t = q;
    t.ext[i].b = e.b + 1;
    push(std::move(t), b.rates.log_in(e.b + 1));
  }
  // Removals that keep the set nonempty.
  const Real inward = e.a >= 1 ? b.rates.log_in(e.a) : b.log_attach_in;
  if (half || e.a < e.b) {
    DualSet t = q;
    t.ext[i].a = e.a + 1;
    push(std::move(t), inward);
  }
  if (!half && e.a < e.b) {
    DualSet t = q;
    t.ext[i].b = e.b - 1;
    push(std::move(t), b.rates.log_out(e.b));
  }
}

std::vector<std::pair<DualSet, Real>> GraphDualModel::dual_moves(const DualSet& q) const {
  std::vector<std::pair<DualSet, Real>> out;
  const Real m = log_mass(q);
  if (q.branch_mode()) {
    add_branch_mode_moves(q, m, out);
  } else {
    add_center_mode_moves(q, m, out);
  }
  return out;
}

std::vector<std::pair<DualSet, Real>> dual_transitions(const DualSet& q,
                                                       const GraphDualModel& model) {
  if (model.is_absorbing(q)) {
    throw Error(ErrorCode::kAbsorbedState, "the full compactified graph has no transitions");
  }
  return model.dual_moves(q);
}

Real GraphDualModel::log_lambda(const DualSet& q, const GraphVertex& x) const {
  if (!contains(q, x)) return kLogZero;
  const Real m = log_mass(q);
  if (m == kLogZero) throw Error(ErrorCode::kEmptyIntersection, "dual set has no mass");
  return log_weight(x) - m;
}

std::optional<std::vector<GraphVertex>> GraphDualModel::lambda_support(const DualSet& q) const {
  std::vector<GraphVertex> v;
  for (std::uint64_t m = q.center; m; m &= m - 1) v.push_back({-1, std::countr_zero(m)});
  for (int i = 0; i < g_.branch_count(); ++i) {
    const BranchExtent& e = q.ext[i];
    if (e.has_delta()) return std::nullopt;
    if (e.kind == Kind::kEmpty) continue;
    const std::int64_t a = e.kind == Kind::kSegment ? e.a : 0;
    for (std::int64_t k = a; k <= e.b; ++k) v.push_back({i, k});
  }
  return v;
}

bool GraphDualModel::is_absorbing(const DualSet& q) const {
  if (q.center != g_.full_center_mask()) return false;
  for (const BranchExtent& e : q.ext) {
    if (e.kind != Kind::kFull) return false;
  }
  return true;
}

bool GraphDualModel::within_tables(const DualSet& q) const {
  for (const BranchExtent& e : q.ext) {
    if ((e.kind == Kind::kPrefix || e.kind == Kind::kSegment) && e.b + 1 > depth_) return false;
    if (e.kind == Kind::kHalfSegment && e.a > depth_) return false;
  }
  return true;
}

std::optional<ExplosionOutcome<DualSet>> GraphDualModel::try_explode(
    const DualSet& q, const ExplosionPolicy& policy, CounterRng& rng) const {
  const double delta = policy.tail_time_budget;
  for (int i = 0; i < g_.branch_count(); ++i) {
    const BranchExtent& e = q.ext[i];
    if (e.kind != Kind::kPrefix && e.kind != Kind::kSegment) continue;
    if (e.b <= policy.bound_threshold) continue;
    const HalfLineRates& r = g_.branch(i).rates;
    // Passage time beyond the tip is bounded by sum 1/L_{phi(k),phi(k-1)}.
    long double sum = 0;
    bool ok = false;
    for (std::int64_t k = e.b + 1; k <= depth_; ++k) {
      const long double term = std::exp(-r.log_in(k));
      sum += term;
      if (sum >= delta) break;
      if (term < 1e-18L * sum) {
        ok = true;
        break;
      }
    }
    if (!ok) continue;
    ExplosionOutcome<DualSet> ex;
    ex.after = q;
    ex.after.ext[i] = e.kind == Kind::kPrefix ? BranchExtent::full()
                                              : BranchExtent::half_segment(e.a);
    for (std::int64_t k = e.b + 1; k <= depth_; ++k) {
      const double mean = static_cast<double>(std::exp(-r.log_in(k)));
      if (mean < delta * 1e-6) break;
      ex.remainder += rng.exponential() * mean;
    }
    ex.which = i;
    ex.stratum_before = q.stratum();
    ex.stratum_after = ex.after.stratum();
    return ex;
  }
  return std::nullopt;
}

GraphVertex GraphDualModel::sample_lambda(const DualSet& q, CounterRng& rng) const {
  Real target = log_mass(q) + std::log(static_cast<Real>(rng.uniform()));
  // Walk the pieces, subtracting masses in linear scale relative to mu(Q).
  const Real m = log_mass(q);
  Real u = std::exp(target - m);
  for (std::uint64_t mm = q.center; mm; mm &= mm - 1) {
    const int v = std::countr_zero(mm);
    const Real w = std::exp(mu_.center[v] - m);
    if (u < w) return {-1, v};
    u -= w;
  }
  GraphVertex last{-1, std::countr_zero(q.center | 1)};
  for (int i = 0; i < g_.branch_count(); ++i) {
    const BranchExtent& e = q.ext[i];
    if (e.kind == Kind::kEmpty) continue;
    const Real w = std::exp(log_extent_mass(i, e) - m);
    const std::int64_t a = (e.kind == Kind::kSegment || e.kind == Kind::kHalfSegment) ? e.a : 0;
    std::int64_t hi = (e.kind == Kind::kPrefix || e.kind == Kind::kSegment) ? e.b : depth_;
    last = {i, hi};
    if (u >= w) {
      u -= w;
      continue;
    }
    const MassTable& t = mu_.branches[i];
    const Real goal = std::log(u) + m;
    std::int64_t lo = a;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (t.log_mass(a, mid) > goal) hi = mid; else lo = mid + 1;
    }
    return {i, lo};
  }
  return last;
}

BranchComparisonRates branch_comparison(int i, std::optional<std::int64_t> base,
                                        std::int64_t last, const GraphDualModel& model) {
  const GraphModel& g = model.graph();
  if (i < 0 || i >= g.branch_count()) {
    throw Error(ErrorCode::kInvalidArgument, "no branch " + std::to_string(i));
  }
  const MassTable& t = model.measure().branches[i];
  const HalfLineRates& r = g.branch(i).rates;
  BranchComparisonRates out;
  out.branch = i;
  out.base = base;
  out.first = base.value_or(0);
  // log mu of the chain's state p.
  std::function<Real(std::int64_t)> mass;
  Real rest = kLogZero;
  if (!base) {
    for (Real w : model.measure().center) rest = log_add(rest, w);
    for (int j = 0; j < g.branch_count(); ++j) {
      if (j != i) rest = log_add(rest, model.measure().branches[j].log_total());
    }
    mass = [&t, rest](std::int64_t p) { return log_add(rest, t.log_mass(0, p)); };
  } else {
    const std::int64_t n = *base;
    mass = [&t, n](std::int64_t p) { return t.log_mass(n, p); };
  }
  for (std::int64_t p = out.first; p <= last; ++p) {
    out.log_up.push_back(mass(p + 1) - mass(p) + r.log_in(p + 1));
    out.log_down.push_back(p == out.first ? kLogZero : mass(p - 1) - mass(p) + r.log_out(p));
  }
  return out;
}

DualTrajectory<DualSet> simulate_dual_graph(const GraphDualModel& model, const DualSet& init,
                                            double horizon, const ExplosionPolicy& policy,
                                            SeedSpec seed) {
  if (!model.connected(init)) {
    throw Error(ErrorCode::kInvalidArgument, "initial dual set is not a connected shape");
  }
  return simulate_stratified(model, init, horizon, policy, seed);
}

void write_dual_csv(std::ostream& os, const DualTrajectory<DualSet>& tr) {
  os << "# sstlab graph dual trajectory v1\n";
  os << "time,state,stratum,event\n";
  char buf[64];
  for (const auto& e : tr.events) {
    std::snprintf(buf, sizeof buf, "%.17g", e.time);
    os << buf << ',' << encode(e.state) << ',' << e.state.stratum() << ','
       << dual_event_name(e.kind) << '\n';
  }
  os << "# terminal " << dual_terminal_name(tr.terminal);
  if (tr.absorption_time) {
    std::snprintf(buf, sizeof buf, "%.17g", *tr.absorption_time);
    os << " absorption_time " << buf;
  }
  os << '\n';
}

}  // namespace sstlab

namespace sstlab {

bool GraphDualModel::negligible_excursion(const GraphVertex& x, const GraphVertex& y,
                                          const DualSet& q, double budget) const {
  if (y.branch < 0) return false;
  const bool outward = x.branch < 0 ? y.index == 0 : y.index == x.index + 1;
  if (!outward || !q.ext[y.branch].has_delta() || !q.ext[y.branch].contains(y.index)) {
    return false;
  }
  const Branch& b = g_.branch(y.branch);
  const Real rate = x.branch < 0 ? b.log_attach_out : b.rates.log_out(x.index);
  const Real beyond = mu_.branches[y.branch].log_mass_from(y.index);
  return beyond - (log_weight(x) + rate) < std::log(static_cast<Real>(budget));
}

}  // namespace sstlab
