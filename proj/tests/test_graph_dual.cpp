#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "sstlab/analysis.hpp"
#include "sstlab/graph_dual.hpp"
#include "sstlab/interval_dual.hpp"

namespace sstlab {
namespace {

using Kind = BranchExtent::Kind;

const GraphDualModel& star_f1() {
  static const GraphDualModel m(testing::star_f1());
  return m;
}

const GraphDualModel& star_mixed() {
  static const GraphDualModel m(testing::star_mixed());
  return m;
}

DualSet center_set(std::vector<BranchExtent> ext) { return DualSet{1, std::move(ext)}; }

DualSet branch_set(int i, BranchExtent e) {
  DualSet q{0, std::vector<BranchExtent>(3)};
  q.ext[i] = e;
  return q;
}

double mass(const GraphDualModel& m, const DualSet& q) {
  return static_cast<double>(std::exp(m.log_mass(q)));
}

double rate(const GraphDualModel& m, const DualSet& q, const DualSet& t) {
  for (const auto& [u, lr] : m.dual_moves(q)) {
    if (u == t) return static_cast<double>(std::exp(lr));
  }
  return 0;
}

// Number of moves of a dual set on a star with center {c}, counted from the
// shape alone.
size_t expected_fan_out(const DualSet& q) {
  size_t n = 0;
  if (!q.branch_mode()) {
    int empty = 0, nonempty = 0;
    for (const BranchExtent& e : q.ext) {
      if (e.kind == Kind::kEmpty) ++empty, ++n;       // add phi_i(0)
      if (e.kind == Kind::kPrefix) ++nonempty, n += 2;  // add or drop the tip
      if (e.kind == Kind::kFull) ++nonempty;
    }
    // Dropping c leaves one component per nonempty branch.
    if (empty > 0) n += static_cast<size_t>(nonempty);
    return n;
  }
  for (const BranchExtent& e : q.ext) {
    if (e.kind == Kind::kSegment) n += e.a < e.b ? 4 : 2;
    if (e.kind == Kind::kHalfSegment) n += 2;
  }
  return n;
}

TEST(DualSetText, RoundTrip) {
  const std::vector<DualSet> sets = {
      center_set({BranchExtent::prefix(3), BranchExtent::empty(), BranchExtent::full()}),
      branch_set(1, BranchExtent::segment(2, 9)),
      branch_set(2, BranchExtent::half_segment(4)),
  };
  for (const DualSet& q : sets) EXPECT_EQ(parse_dual_set(encode(q), 3), q) << encode(q);
  EXPECT_EQ(encode(sets[0]), "C:1;B1:P3;B2:-;B3:F");
  EXPECT_EQ(sets[0].stratum(), 1);
  EXPECT_EQ(sets[2].stratum(), 1);
  EXPECT_EQ(star_f1().full().stratum(), 3);
}

TEST(DualTransitions, SingletonOnlyGrows) {
  const GraphDualModel& m = star_f1();
  const DualSet c = m.singleton({-1, 0});
  const auto mv = m.dual_moves(c);
  ASSERT_EQ(mv.size(), 3u);
  for (const auto& [t, lr] : mv) EXPECT_GT(mass(m, t), mass(m, c));
  const DualSet b = m.singleton({1, 5});
  EXPECT_EQ(b, branch_set(1, BranchExtent::segment(5, 5)));
  const auto mb = m.dual_moves(b);
  ASSERT_EQ(mb.size(), 2u);
  for (const auto& [t, lr] : mb) EXPECT_GT(mass(m, t), mass(m, b));
}

TEST(DualTransitions, GrowthRateFormula) {
  // (mu(Q + p) / mu(Q)) sum_{q in Q} L_{p,q} for p = phi_1(0), Q = {c}.
  const GraphDualModel& m = star_f1();
  const DualSet c = m.singleton({-1, 0});
  const DualSet t = center_set({BranchExtent::prefix(0), BranchExtent::empty(), BranchExtent::empty()});
  EXPECT_NEAR(rate(m, c, t), 2.0 * 1.0, 1e-14);
  // Q = {c, phi_1(0..2)} grows to phi_1(3): (1 + 1.75 + 1/8) / (1 + 1.75) * in(3) = 8 * 23 / 22.
  const DualSet q = center_set({BranchExtent::prefix(2), BranchExtent::empty(), BranchExtent::empty()});
  const DualSet q3 = center_set({BranchExtent::prefix(3), BranchExtent::empty(), BranchExtent::empty()});
  EXPECT_NEAR(rate(m, q, q3), 8.0 * 2.875 / 2.75, 1e-13);
}

TEST(DualTransitions, CenterRemovalSplitsByMass) {
  const GraphDualModel& m = star_f1();
  // Q = {c} + phi_1(0..2) + phi_2(0); dropping c leaves two components.
  const DualSet q =
      center_set({BranchExtent::prefix(2), BranchExtent::prefix(0), BranchExtent::empty()});
  const DualSet a = branch_set(0, BranchExtent::segment(0, 2));
  const DualSet b = branch_set(1, BranchExtent::segment(0, 0));
  const double mq = 1 + 1.75 + 1;
  ASSERT_NEAR(mass(m, q), mq, 1e-14);
  // Only L_{c, phi_3(0)} = 1 leaves Q from c.
  EXPECT_NEAR(rate(m, q, a), 1.75 / mq, 1e-14);
  EXPECT_NEAR(rate(m, q, b), 1.0 / mq, 1e-14);
  EXPECT_NEAR(rate(m, q, a) + rate(m, q, b), (1.75 + 1.0) / mq * 1.0, 1e-14);
}

TEST(DualTransitions, RemovalTotalsOverSampledStates) {
  const GraphDualModel& m = star_f1();
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::int64_t> len(0, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<BranchExtent> ext(3);
    for (auto& e : ext) {
      const int k = kind(gen);
      e = k == 0 ? BranchExtent::empty() : k == 1 ? BranchExtent::prefix(len(gen)) : BranchExtent::full();
    }
    const DualSet q = center_set(ext);
    if (m.is_absorbing(q)) continue;
    // Exit rate of c: attach_out = 1 to every empty branch.
    double exit = 0, comp = 0, total = 0;
    for (const BranchExtent& e : ext) exit += e.kind == Kind::kEmpty ? 1.0 : 0.0;
    for (int i = 0; i < 3; ++i) {
      if (ext[i].kind == Kind::kEmpty) continue;
      DualSet piece = branch_set(i, ext[i].kind == Kind::kFull ? BranchExtent::half_segment(0)
                                                              : BranchExtent::segment(0, ext[i].b));
      comp += mass(m, piece);
      total += rate(m, q, piece);
    }
    EXPECT_NEAR(total, exit * comp / mass(m, q), 1e-10) << encode(q);
  }
}

TEST(DualTransitions, FanOutMatchesShapeCount) {
  const GraphDualModel& m = star_f1();
  std::vector<DualSet> sets;
  std::vector<BranchExtent> opts{BranchExtent::empty(), BranchExtent::full()};
  for (std::int64_t k = 0; k <= 6; ++k) opts.push_back(BranchExtent::prefix(k));
  for (const auto& e0 : opts) {
    for (const auto& e1 : opts) {
      for (const auto& e2 : opts) sets.push_back(center_set({e0, e1, e2}));
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (std::int64_t a = 0; a <= 6; ++a) {
      sets.push_back(branch_set(i, BranchExtent::half_segment(a)));
      for (std::int64_t b = a; b <= 6; ++b) sets.push_back(branch_set(i, BranchExtent::segment(a, b)));
    }
  }
  size_t worst = 0;
  for (const DualSet& q : sets) {
    if (m.is_absorbing(q)) continue;
    const size_t n = m.dual_moves(q).size();
    EXPECT_EQ(n, expected_fan_out(q)) << encode(q);
    worst = std::max(worst, n);
  }
  // Attained by one empty branch and two prefixes.
  EXPECT_EQ(worst, 7u);
}

TEST(DualTransitions, FullSetIsAbsorbing) {
  try {
    dual_transitions(star_f1().full(), star_f1());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAbsorbedState);
  }
}

TEST(DualTransitions, DeltaOnlySetHasNoLambda) {
  // {Delta_i} alone is not a dual state; a Full branch without its base is
  // represented as HalfSegment and always keeps graph vertices.
  const GraphDualModel& m = star_f1();
  const DualSet h = branch_set(0, BranchExtent::half_segment(3));
  EXPECT_FALSE(m.lambda_support(h).has_value());
  double sum = 0;
  for (std::int64_t k = 3; k < 200; ++k) sum += static_cast<double>(std::exp(m.log_lambda(h, {0, k})));
  EXPECT_NEAR(sum, 1, 1e-12);
  EXPECT_EQ(m.log_lambda(h, {0, 2}), kLogZero);
}

TEST(DualTransitions, ConnectivityIsPreserved) {
  for (const GraphDualModel* m : {&star_f1(), &star_mixed()}) {
    std::int64_t checked = 0;
    for (std::uint64_t i = 0; checked < 10000; ++i) {
      const auto tr = simulate_dual_graph(*m, m->singleton({-1, 0}), 50.0, {}, {4, i});
      for (const auto& e : tr.events) {
        EXPECT_TRUE(m->connected(e.state)) << encode(e.state);
        if (m->is_absorbing(e.state)) continue;
        for (const auto& [t, lr] : m->dual_moves(e.state)) {
          EXPECT_TRUE(m->connected(t)) << encode(e.state) << " -> " << encode(t);
          EXPECT_TRUE(std::isfinite(static_cast<double>(lr)));
          ++checked;
        }
      }
    }
  }
}

TEST(BranchComparison, SingleBranchMatchesIntervalComparison) {
  const HalfLineRates r = HalfLineRates::geometric(1, 2);
  RawGraph raw;
  raw.names = {"c"};
  raw.rays.push_back({0, 3.0, 0.5, r});
  const GraphDualModel g(compute_center(raw), 512);
  const IntervalModel line(
      BDRates::half_line(r.with_prefix({3.0}, {0.5}), BDRates::Family::kGeometric), 512);
  const BranchComparisonRates c = branch_comparison(0, std::nullopt, 40, g);
  ASSERT_EQ(c.first, 0);
  // G_p = {c, phi(0..p)} is the half-line interval [0, p + 1].
  for (std::int64_t p = 0; p < 40; ++p) {
    const auto [lb, la] = comparison_rates(p + 1, line.rates(), line.measure());
    EXPECT_NEAR(static_cast<double>(std::exp(c.log_up[p] - lb)), 1, 1e-12) << p;
    if (p > 0) EXPECT_NEAR(static_cast<double>(std::exp(c.log_down[p] - la)), 1, 1e-12) << p;
  }
  EXPECT_EQ(c.log_down[0], kLogZero);
}

TEST(BranchComparison, SegmentChainCannotShrinkPastBase) {
  for (std::int64_t n : {0, 3, 10}) {
    const BranchComparisonRates c = branch_comparison(1, n, n + 20, star_f1());
    EXPECT_EQ(c.first, n);
    EXPECT_EQ(c.log_down.front(), kLogZero);
    for (size_t k = 1; k < c.log_down.size(); ++k) {
      EXPECT_TRUE(std::isfinite(static_cast<double>(c.log_down[k])));
    }
  }
}

TEST(BranchComparison, DualGrowthDominates) {
  const GraphDualModel& m = star_mixed();
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::int64_t> len(0, 60);
  for (int i = 0; i < 3; ++i) {
    const BranchComparisonRates c = branch_comparison(i, std::nullopt, 51, m);
    for (std::int64_t p = 0; p <= 50; ++p) {
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<BranchExtent> ext(3);
        for (int j = 0; j < 3; ++j) {
          const int k = kind(gen);
          ext[j] = k == 0 ? BranchExtent::empty() : k == 1 ? BranchExtent::prefix(len(gen)) : BranchExtent::full();
        }
        ext[i] = BranchExtent::prefix(p);
        const DualSet q = center_set(ext);
        DualSet up = q;
        up.ext[i] = BranchExtent::prefix(p + 1);
        EXPECT_GE(rate(m, q, up), static_cast<double>(std::exp(c.log_up[p])) * (1 - 1e-12))
            << encode(q);
      }
    }
  }
}

TEST(SimulateDualGraph, FullSetIsAbsorbedAtZero) {
  const auto tr = simulate_dual_graph(star_f1(), star_f1().full(), 10.0, {}, {1, 0});
  EXPECT_EQ(tr.terminal, DualTerminal::kAbsorbed);
  EXPECT_EQ(tr.absorption_time, 0.0);
}

TEST(SimulateDualGraph, ConvergentStarIsAbsorbed) {
  const GraphDualModel& m = star_f1();
  const auto s = survey(m, m.singleton({-1, 0}), 200, 1000.0, {}, 5, 1);
  int absorbed = 0;
  for (const SurveyTrial& t : s) absorbed += t.absorption_time ? 1 : 0;
  EXPECT_GE(absorbed, 198);
}

TEST(SimulateDualGraph, DivergentBranchNeverExplodes) {
  const GraphDualModel& m = star_mixed();
  const auto s = survey(m, m.singleton({-1, 0}), 200, 1000.0, {}, 6, 1);
  for (const SurveyTrial& t : s) {
    EXPECT_FALSE(t.absorption_time.has_value());
    for (int w : t.explosions) EXPECT_NE(w, 1);
  }
}

TEST(SimulateDualGraph, StrataChangeOnlyAtExplosionsOrSplits) {
  const GraphDualModel& m = star_f1();
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto tr = simulate_dual_graph(m, m.singleton({-1, 0}), 1000.0, {}, {7, i});
    for (size_t k = 1; k < tr.events.size(); ++k) {
      const DualSet& a = tr.events[k - 1].state;
      const DualSet& b = tr.events[k].state;
      if (tr.events[k].kind == DualEventKind::kExplosion) {
        EXPECT_EQ(b.stratum(), a.stratum() + 1);
      } else if (b.stratum() != a.stratum()) {
        // Only dropping the center can discard a branch that holds Delta.
        EXPECT_LT(b.stratum(), a.stratum());
        EXPECT_FALSE(a.branch_mode());
        EXPECT_TRUE(b.branch_mode());
      }
    }
  }
}

TEST(SimulateDualGraph, TrajectoryCsv) {
  const GraphDualModel& m = star_f1();
  const auto tr = simulate_dual_graph(m, m.singleton({-1, 0}), 1000.0, {}, {8, 0});
  std::ostringstream os;
  write_dual_csv(os, tr);
  EXPECT_EQ(os.str().rfind("# sstlab graph dual trajectory v1\ntime,state,stratum,event\n", 0), 0u);
}

TEST(SimulateDualGraph, DisconnectedInitIsRejected) {
  const DualSet bad = center_set({BranchExtent::segment(2, 4), BranchExtent::empty(), BranchExtent::empty()});
  EXPECT_FALSE(star_f1().connected(bad));
  EXPECT_THROW(simulate_dual_graph(star_f1(), bad, 1.0, {}, {1, 0}), Error);
}

TEST(GraphDuality, SmallDepthResidual) {
  const ResidualReport r = duality_check(star_mixed(), 5);
  EXPECT_LT(r.max_interior, 1e-9);
  EXPECT_GT(r.interior_rows, 100);
}

TEST(GraphMartingale, CompensatedCountHasMeanZero) {
  const GraphDualModel& m = star_f1();
  const MeanEstimate e =
      martingale_check(m, m.singleton({-1, 0}), 1.0, graph_count(m, 6), 2000, 11, 1);
  EXPECT_GT(e.sd, 0);
  EXPECT_LT(std::abs(e.z()), 4) << e.mean << " +- " << e.std_error();
}

}  // namespace
}  // namespace sstlab
