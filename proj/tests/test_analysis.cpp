#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "sstlab/analysis.hpp"
#include "sstlab/report.hpp"

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

Eigen::VectorXd point_mass(const Truncation& tr, const std::string& label) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(tr.pi.size());
  for (size_t k = 0; k < tr.labels.size(); ++k) {
    if (tr.labels[k] == label) v(static_cast<int>(k)) = 1;
  }
  EXPECT_EQ(v.sum(), 1) << label;
  return v;
}

TEST(Criterion, F1ClosedForm) {
  const CriterionReport r = criterion(testing::f1());
  ASSERT_EQ(r.sides.size(), 2u);
  for (const CriterionSide& s : r.sides) {
    EXPECT_EQ(s.evidence.verdict, SeriesVerdict::kConverges) << s.label;
    ASSERT_GE(s.terms.size(), 40u);
    for (size_t i = 1; i <= s.terms.size(); ++i) {
      const double term = static_cast<double>(i) * std::ldexp(1.0, -static_cast<int>(i + 1));
      EXPECT_NEAR(s.terms[i - 1], term, 1e-15 + 1e-13 * term) << i;
    }
    EXPECT_NEAR(s.partial_sums.back(), 1.0, 1e-12);
    EXPECT_LE(s.terms.size(), 100u);
  }
  EXPECT_EQ(r.verdict, SeriesVerdict::kConverges);
  EXPECT_FALSE(r.flagged);
}

TEST(Criterion, F2ClosedForm) {
  const CriterionReport r = criterion(testing::f2());
  for (const CriterionSide& s : r.sides) {
    EXPECT_EQ(s.evidence.verdict, SeriesVerdict::kDiverges) << s.label;
    ASSERT_GE(s.terms.size(), 50u);
    for (size_t i = 1; i <= 50; ++i) {
      EXPECT_NEAR(s.terms[i - 1], 1 - std::ldexp(1.0, -static_cast<int>(i)), 1e-12) << i;
    }
  }
  EXPECT_EQ(r.verdict, SeriesVerdict::kDiverges);
}

TEST(Criterion, ExplosivePrimalIsFlagged) {
  const BDRates r =
      BDRates::symmetric(HalfLineRates::power(1, 8, 0.5, 4), BDRates::Family::kPower);
  const CriterionReport rep = criterion(r);
  EXPECT_TRUE(rep.flagged);
  EXPECT_EQ(rep.sides.size(), 2u);
}

TEST(Criterion, StarBranches) {
  const CriterionReport r = criterion(testing::star_mixed());
  ASSERT_EQ(r.sides.size(), 3u);
  EXPECT_EQ(r.sides[0].evidence.verdict, SeriesVerdict::kConverges);
  EXPECT_EQ(r.sides[1].evidence.verdict, SeriesVerdict::kDiverges);
  EXPECT_EQ(r.sides[2].evidence.verdict, SeriesVerdict::kConverges);
  EXPECT_EQ(r.verdict, SeriesVerdict::kDiverges);
  EXPECT_EQ(criterion(testing::star_f1()).verdict, SeriesVerdict::kConverges);
}

TEST(Separation, StationaryStartIsFlat) {
  const Truncation tr = truncate_line(testing::f1(), -40, 40);
  const Eigen::VectorXd mu0 = tr.pi / tr.pi.sum();
  const SeparationCurve c = separation_curve(tr, mu0, {0.0, 0.5, 2.0});
  for (const SeparationPoint& p : c.points) EXPECT_LE(p.separation, 1e-8) << p.t;
}

TEST(Separation, PointMassStartsAtOne) {
  const Truncation tr = truncate_line(testing::f2(), -40, 40);
  const SeparationCurve c = separation_curve(tr, point_mass(tr, "0"), {0.0, 1.0, 4.0});
  EXPECT_EQ(c.points[0].separation, 1.0);
  EXPECT_TRUE(c.monotone);
  EXPECT_LT(c.points[2].separation, c.points[1].separation);
}

TEST(Separation, NarrowWindowIsRejected) {
  // [-30, 30] leaves 2^-30 / 3 of the mass outside, above the default bound.
  const Truncation a = truncate_line(testing::f1(), -30, 30);
  EXPECT_GT(a.tail_mass, kMaxTailMass);
  try {
    separation_curve(a, point_mass(a, "0"), {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWindowTooSmall);
  }
}

TEST(Separation, WindowDoublingStability) {
  const std::vector<double> grid{0.5, 1.0, 2.0};
  const Truncation a = truncate_line(testing::f1(), -35, 35);
  const Truncation b = truncate_line(testing::f1(), -70, 70);
  const SeparationCurve ca = separation_curve(a, point_mass(a, "0"), grid);
  const SeparationCurve cb = separation_curve(b, point_mass(b, "0"), grid);
  for (size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(ca.points[k].separation, cb.points[k].separation, 1e-8) << grid[k];
    EXPECT_GT(cb.points[k].separation, 0.01);
  }
}

TEST(Separation, GraphTruncationMatchesMeasure) {
  const GraphModel g = testing::star_f1();
  const Truncation tr = truncate_graph(g, 30);
  ASSERT_EQ(tr.pi.size(), 1 + 3 * 31);
  // mu(c) = 1, mu(phi_i(k)) = 2^-k, total 7.
  EXPECT_NEAR(tr.pi(0), 1.0 / 7, 1e-15);
  EXPECT_NEAR(tr.pi(1 + 5), std::ldexp(1.0, -5) / 7, 1e-15);
  for (int i = 0; i < tr.L.rows(); ++i) EXPECT_NEAR(tr.L.row(i).sum(), 0, 1e-6);
  const Eigen::VectorXd res = tr.pi.transpose() * tr.L;
  EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Statistics, WilsonReference) {
  const Interval w = wilson(5, 10, 1.96);
  EXPECT_NEAR(w.lo, 0.2366, 1e-4);
  EXPECT_NEAR(w.hi, 0.7634, 1e-4);
  const Interval z = wilson(0, 100, 1.0);
  EXPECT_EQ(z.lo, 0.0);
  EXPECT_NEAR(z.hi, 1.0 / 101, 1e-12);
}

TEST(Statistics, ChiSquareReference) {
  const ChiSquare c = chi_square({0.5, 0.5}, {60, 40}, 100);
  EXPECT_NEAR(c.statistic, 4.0, 1e-12);
  EXPECT_EQ(c.dof, 1);
  // Survival function of chi-square(1) at 4.
  EXPECT_NEAR(c.p_value, std::erfc(std::sqrt(2.0)), 1e-12);
}

TEST(Statistics, ChiSquarePoolsSmallBins) {
  // Expected counts 50, 45, 3, 2: the last two form one pooled bin of 5.
  const ChiSquare c = chi_square({0.5, 0.45, 0.03, 0.02}, {50, 45, 3, 2}, 100);
  EXPECT_EQ(c.bins, 3);
  EXPECT_EQ(c.dof, 2);
  EXPECT_NEAR(c.statistic, 0, 1e-12);
  EXPECT_NEAR(c.p_value, 1, 1e-12);
}

TEST(Statistics, SurvivalGrid) {
  const AbsorptionStats s = absorption_stats({3.0, 1.0, 2.0}, 4, 0, {0.5, 1.0, 2.5});
  EXPECT_EQ(s.times, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(s.non_absorbed(), 1);
  EXPECT_EQ(s.grid[0].survival, 1.0);
  EXPECT_EQ(s.grid[1].survival, 0.75);
  EXPECT_EQ(s.grid[2].survival, 0.5);
  EXPECT_GT(s.grid[2].ci, 0);
}

TEST(Statistics, BoundCheckFlags) {
  SeparationCurve sep;
  sep.points = {{1.0, 0.5}, {2.0, 0.9}};
  AbsorptionStats st;
  st.grid = {{1.0, 0.52, 0.01}, {2.0, 0.6, 0.01}};
  const auto rows = bound_check(sep, st);
  EXPECT_TRUE(rows[0].bound_ok);
  EXPECT_TRUE(rows[0].sharp_ok);
  EXPECT_FALSE(rows[1].bound_ok);
  EXPECT_FALSE(rows[1].sharp_ok);
}

TEST(Trials, ResultsDoNotDependOnThreads) {
  const auto a = survey(f1_model(), IntervalState{0, 0}, 40, 1000.0, {}, 17, 1);
  const auto b = survey(f1_model(), IntervalState{0, 0}, 40, 1000.0, {}, 17, 3);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].absorption_time, b[i].absorption_time);
    EXPECT_EQ(a[i].explosions, b[i].explosions);
  }
}

TEST(Sst, CompatibilityIsChecked) {
  ExperimentInit<IntervalModel> init;
  init.mu0 = {{0, 0.5}};
  try {
    check_compatible(f1_model(), init);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotLambdaCompatible);
  }
  init.set = IntervalState{0, 0};
  EXPECT_THROW(check_compatible(f1_model(), init), Error);
}

TEST(Sst, SharpConfigurationMatchesSeparation) {
  const IntervalModel& m = f1_model();
  ExperimentInit<IntervalModel> init;
  init.set = IntervalState{kMinusInfinity, 0};
  ExperimentSettingsRun s;
  s.trials = 3000;
  s.grid = {0.25, 0.5, 1.0};
  s.seed = 19;
  const auto out = sst_experiment(m, init, s);
  EXPECT_EQ(out.stats.absorbed, s.trials);
  const Truncation tr = truncate_line(testing::f1(), -40, 40);
  Eigen::VectorXd mu0 = tr.pi;
  for (std::int64_t x = 1; x <= 40; ++x) mu0(40 + x) = 0;
  mu0 /= mu0.sum();
  const auto rows = bound_check(separation_curve(tr, mu0, s.grid), out.stats);
  for (const BoundRow& r : rows) {
    EXPECT_TRUE(r.bound_ok) << r.t;
    EXPECT_TRUE(r.sharp_ok) << r.t << ' ' << r.separation << ' ' << r.survival;
  }
  // X_T is stationary: chi-square over [-10, 10].
  std::vector<std::int64_t> xs, counts;
  for (std::int64_t x = -10; x <= 10; ++x) {
    xs.push_back(x);
    auto it = out.x_at_absorption.find(x);
    counts.push_back(it == out.x_at_absorption.end() ? 0 : it->second);
  }
  EXPECT_GT(chi_square(stationary_probs(m, xs), counts, out.stats.absorbed).p_value, 0.001);
}

TEST(Sst, PointMassStartSatisfiesBound) {
  const IntervalModel& m = f1_model();
  ExperimentInit<IntervalModel> init;
  init.mu0 = {{0, 1.0}};
  ExperimentSettingsRun s;
  s.trials = 3000;
  s.grid = {0.5, 2.0};
  s.seed = 23;
  const auto out = sst_experiment(m, init, s);
  const Truncation tr = truncate_line(testing::f1(), -40, 40);
  for (const BoundRow& r : bound_check(separation_curve(tr, point_mass(tr, "0"), s.grid), out.stats)) {
    EXPECT_TRUE(r.bound_ok) << r.t;
  }
}

TEST(Sst, DivergentModelNeverAbsorbs) {
  ExperimentInit<IntervalModel> init;
  init.mu0 = {{0, 1.0}};
  ExperimentSettingsRun s;
  s.trials = 20;
  s.horizon = 100;
  s.grid = {1.0};
  const auto out = sst_experiment(f2_model(), init, s);
  EXPECT_EQ(out.stats.absorbed, 0);
  EXPECT_EQ(out.stats.grid[0].survival, 1.0);
}

TEST(Sst, ConcordanceAcrossHorizons) {
  // Converges: everything absorbed at both horizons; Diverges: nothing.
  for (double h : {250.0, 500.0}) {
    int f1_abs = 0, f2_abs = 0;
    for (const auto& t : survey(f1_model(), IntervalState{0, 0}, 100, h, {}, 29, 1)) {
      f1_abs += t.absorption_time ? 1 : 0;
    }
    for (const auto& t : survey(f2_model(), IntervalState{0, 0}, 10, h, {}, 29, 1)) {
      f2_abs += t.absorption_time ? 1 : 0;
    }
    EXPECT_EQ(f1_abs, 100) << h;
    EXPECT_EQ(f2_abs, 0) << h;
  }
}

TEST(Report, CsvFormats) {
  std::ostringstream os;
  SeparationCurve c;
  c.points = {{0.5, 0.25}};
  c.window = "[-40,40]";
  write_separation_csv(os, c);
  EXPECT_EQ(os.str().rfind("# sstlab separation v1\nt,separation\n0.5,0.25\n", 0), 0u);
  EXPECT_EQ(artifact_name("sst", 42, "csv"), "sst-seed42.csv");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

}  // namespace
}  // namespace sstlab
