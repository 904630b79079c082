#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "sstlab/analysis.hpp"
#include "sstlab/interval_dual.hpp"

namespace sstlab {
namespace {

const IntervalModel& f1_model() {
  static const IntervalModel m(testing::f1());
  return m;
}

const IntervalModel& f2_model() {
  static const IntervalModel m(testing::f2(), 4096);
  return m;
}

// Rate of s -> t, 0 when the move is not emitted.
double rate(const IntervalModel& m, const IntervalState& s, const IntervalState& t) {
  for (const auto& [u, lr] : m.dual_moves(s)) {
    if (u == t) return static_cast<double>(std::exp(lr));
  }
  return 0;
}

TEST(Interval, EncodeRoundTrip) {
  for (const IntervalState s : {IntervalState{-3, 7}, IntervalState{kMinusInfinity, 2},
                                IntervalState{4, kPlusInfinity},
                                IntervalState{kMinusInfinity, kPlusInfinity}}) {
    EXPECT_EQ(parse_interval(encode(s)), s) << encode(s);
  }
  EXPECT_EQ(encode(IntervalState{kMinusInfinity, 2}), "[-inf,2]");
  EXPECT_EQ(stratum({0, 1}), 1);
  EXPECT_EQ(stratum({0, kPlusInfinity}), 2);
  EXPECT_EQ(stratum({kMinusInfinity, kPlusInfinity}), 3);
}

TEST(DualRates, F2GrowRight) {
  // (mu([0,3]) / mu([0,2])) a_3 = ((15/8) / (7/4)) 2.
  EXPECT_NEAR(rate(f2_model(), {0, 2}, {0, 3}), 15.0 / 7, 1e-14);
}

TEST(DualRates, F2GrowLeftMirrored) {
  // Mirrored F2 has mu(-1) = 1/2 and b_{-1} = 2.
  EXPECT_NEAR(rate(f2_model(), {0, 2}, {-1, 2}), 18.0 / 7, 1e-14);
}

TEST(DualRates, GrowLeftWithUnitBirthBelowOrigin) {
  // Same weights near 0 as F2 but b_{-1} = 1, a_0 = 1/2.
  std::vector<double> births, deaths;
  for (std::int64_t n = -6; n < 6; ++n) {
    births.push_back(n == -1 ? 1.0 : n < 0 ? 2.0 : 1.0);
    deaths.push_back(n + 1 == 0 ? 0.5 : n + 1 < 0 ? 1.0 : 2.0);
  }
  const IntervalModel m(BDRates::table(-6, births, deaths));
  EXPECT_NEAR(static_cast<double>(std::exp(m.measure().log_weight(-1) - m.measure().log_weight(0))),
              0.5, 1e-15);
  EXPECT_NEAR(rate(m, {0, 2}, {-1, 2}), 9.0 / 7, 1e-14);
}

TEST(DualRates, ShrinkRates) {
  // (mu([1,2]) / mu([0,2])) a_0 and (mu([0,1]) / mu([0,2])) b_2 under F2.
  EXPECT_NEAR(rate(f2_model(), {0, 2}, {1, 2}), (3.0 / 4) / (7.0 / 4) * 1, 1e-14);
  EXPECT_NEAR(rate(f2_model(), {0, 2}, {0, 1}), (3.0 / 2) / (7.0 / 4) * 1, 1e-14);
}

TEST(DualRates, SingletonHasNoShrinkMoves) {
  const auto mv = f2_model().dual_moves({3, 3});
  ASSERT_EQ(mv.size(), 2u);
  for (const auto& [t, lr] : mv) EXPECT_EQ(t.q - t.p, 1);
}

TEST(DualRates, LeftInfiniteHasNoLeftMoves) {
  for (const auto& [t, lr] : f2_model().dual_moves({kMinusInfinity, 3})) {
    EXPECT_EQ(t.p, kMinusInfinity);
  }
}

TEST(DualRates, FiniteSupportEndsStop) {
  const IntervalModel m(BDRates::table(0, {1, 1, 1}, {2, 2, 2}));
  for (const auto& [t, lr] : m.dual_moves({0, 1})) EXPECT_GE(t.p, 0);
  for (const auto& [t, lr] : m.dual_moves({2, 3})) EXPECT_LE(t.q, 3);
  EXPECT_TRUE(m.is_absorbing({0, 3}));
  EXPECT_EQ(m.full(), (IntervalState{0, 3}));
}

TEST(ComparisonRates, F2AtOrigin) {
  const auto [lb, la] = comparison_rates(0, testing::f2(), f2_model().measure());
  EXPECT_NEAR(static_cast<double>(std::exp(lb)), 2.5, 1e-14);
  // (mu((-inf,-1]) / mu((-inf,0])) b_0 = (1/2) 1.
  EXPECT_NEAR(static_cast<double>(std::exp(la)), 0.5, 1e-14);
}

TEST(ComparisonRates, LeftInfiniteGrowthIsTheComparisonRate) {
  for (const IntervalModel* m : {&f1_model(), &f2_model()}) {
    for (std::int64_t q = -30; q <= 30; ++q) {
      const auto [lb, la] = comparison_rates(q, m->rates(), m->measure());
      const double g = rate(*m, {kMinusInfinity, q}, {kMinusInfinity, q + 1});
      EXPECT_NEAR(g / static_cast<double>(std::exp(lb)), 1, 1e-12) << q;
    }
  }
}

TEST(ComparisonRates, Domination) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::int64_t> pick(-50, 50);
  for (const IntervalModel* m : {&f1_model(), &f2_model()}) {
    for (int k = 0; k < 1000; ++k) {
      std::int64_t p = pick(gen), q = pick(gen);
      if (p > q) std::swap(p, q);
      const auto [lb, la] = comparison_rates(q, m->rates(), m->measure());
      const double grow = rate(*m, {p, q}, {p, q + 1});
      const double shrink = rate(*m, {p, q}, {p, q - 1});
      EXPECT_GE(grow, static_cast<double>(std::exp(lb)) * (1 - 1e-12)) << p << ' ' << q;
      EXPECT_LE(shrink, static_cast<double>(std::exp(la)) * (1 + 1e-12)) << p << ' ' << q;
    }
  }
}

TEST(SimulateDual, FullLineIsAbsorbedAtZero) {
  const auto tr = simulate_dual(f1_model(), f1_model().full(), 10.0, {}, {1, 0});
  EXPECT_EQ(tr.terminal, DualTerminal::kAbsorbed);
  EXPECT_EQ(tr.absorption_time, 0.0);
}

TEST(SimulateDual, F1IsAbsorbed) {
  const auto s = survey(f1_model(), IntervalState{0, 0}, 300, 1000.0, {}, 3, 1);
  for (const SurveyTrial& t : s) {
    ASSERT_TRUE(t.absorption_time.has_value());
    EXPECT_EQ(t.explosions.size(), 2u);
  }
}

TEST(SimulateDual, F2IsNeverAbsorbed) {
  const auto s = survey(f2_model(), IntervalState{0, 0}, 20, 100.0, {}, 4, 1);
  for (const SurveyTrial& t : s) {
    EXPECT_FALSE(t.absorption_time.has_value());
    EXPECT_TRUE(t.explosions.empty());
  }
}

TEST(SimulateDual, StrataOnlyRiseAtExplosions) {
  const IntervalModel& m = f1_model();
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto tr = simulate_dual(m, {0, 0}, 1000.0, {}, {6, i});
    size_t explosions = 0;
    for (size_t k = 1; k < tr.events.size(); ++k) {
      const int before = m.stratum(tr.events[k - 1].state);
      const int after = m.stratum(tr.events[k].state);
      if (tr.events[k].kind == DualEventKind::kExplosion) {
        EXPECT_EQ(after, before + 1);
        ++explosions;
      } else {
        EXPECT_EQ(after, before);
      }
    }
    EXPECT_EQ(explosions, tr.explosions.size());
  }
}

TEST(SimulateDual, FanOutAndPositiveRates) {
  const IntervalModel& m = f1_model();
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto tr = simulate_dual(m, {0, 0}, 1000.0, {}, {7, i});
    for (const auto& e : tr.events) {
      if (m.is_absorbing(e.state)) continue;
      const auto mv = m.dual_moves(e.state);
      EXPECT_LE(mv.size(), 4u);
      EXPECT_GE(mv.size(), 1u);
      for (const auto& [t, lr] : mv) EXPECT_TRUE(std::isfinite(static_cast<double>(lr)));
    }
  }
}

TEST(SimulateDual, ExplosionTimeIsStableUnderLargerThreshold) {
  const IntervalModel& m = f1_model();
  ExplosionPolicy a, b;
  b.bound_threshold = 2 * a.bound_threshold;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto ta = simulate_dual(m, {0, 0}, 1000.0, a, {8, i});
    const auto tb = simulate_dual(m, {0, 0}, 1000.0, b, {8, i});
    ASSERT_FALSE(ta.explosions.empty());
    ASSERT_FALSE(tb.explosions.empty());
    EXPECT_EQ(ta.explosions[0].which, tb.explosions[0].which);
    EXPECT_LT(std::abs(ta.explosions[0].time - tb.explosions[0].time), 10 * a.tail_time_budget);
  }
}

TEST(SimulateDual, TrajectoryCsv) {
  const auto tr = simulate_dual(f1_model(), {0, 0}, 1000.0, {}, {9, 0});
  std::ostringstream os;
  write_dual_csv(os, tr);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("# sstlab interval dual trajectory v1\ntime,p,q,stratum,event\n", 0), 0u);
  EXPECT_NE(s.find("explosion"), std::string::npos);
}

TEST(NegligibleExcursion, DeepOutwardMovesOnly) {
  const IntervalModel& m = f1_model();
  const IntervalState s{0, kPlusInfinity};
  // Mean excursion beyond x: mu((x, inf)) / (mu(x) b_x) = 2^-x.
  EXPECT_TRUE(m.negligible_excursion(60, 61, s, 1e-12));
  EXPECT_FALSE(m.negligible_excursion(10, 11, s, 1e-12));
  EXPECT_FALSE(m.negligible_excursion(60, 59, s, 1e-12));
  EXPECT_FALSE(m.negligible_excursion(60, 61, IntervalState{0, 100}, 1e-12));
}

TEST(Martingale, CompensatedCountHasMeanZero) {
  const IntervalModel& m = f1_model();
  const MeanEstimate e = martingale_check(m, IntervalState{0, 0}, 1.0, interval_count(5), 4000, 10, 1);
  EXPECT_GT(e.sd, 0);
  EXPECT_LT(std::abs(e.z()), 4) << e.mean << " +- " << e.std_error();
}

}  // namespace
}  // namespace sstlab
