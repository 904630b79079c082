#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "sstlab/ctmc.hpp"
#include "sstlab/error.hpp"

namespace sstlab {
namespace {

using Row = std::vector<std::pair<std::int64_t, double>>;

// Birth-death oracle on Z from explicit rates.
struct BdOracle {
  BDRates r;
  Row row(std::int64_t x) const {
    Row out;
    if (r.in_support(x - 1)) out.push_back({x - 1, r.death(x)});
    if (r.in_support(x + 1)) out.push_back({x + 1, r.birth(x)});
    return out;
  }
};

// Two states flipping at rates `up` (0 -> 1) and `down` (1 -> 0).
struct FlipOracle {
  double up = 1, down = 1;
  Row row(std::int64_t x) const { return x == 0 ? Row{{1, up}} : Row{{0, down}}; }
};

struct DeadOracle {
  Row row(std::int64_t) const { return {}; }
};

TEST(SimulateMinimal, AbsorbingInitStops) {
  const auto tr = simulate_minimal(DeadOracle{}, std::int64_t{5}, 10.0, 100, {1, 0});
  EXPECT_EQ(tr.terminal, Terminal::kAbsorbed);
  EXPECT_EQ(tr.states, (std::vector<std::int64_t>{5}));
  EXPECT_EQ(tr.jumps(), 0u);
}

TEST(SimulateMinimal, SameSeedSameTrajectory) {
  const BdOracle o{testing::f2()};
  const auto a = simulate_minimal(o, std::int64_t{0}, 50.0, 100000, {7, 3});
  const auto b = simulate_minimal(o, std::int64_t{0}, 50.0, 100000, {7, 3});
  const auto c = simulate_minimal(o, std::int64_t{0}, 50.0, 100000, {7, 4});
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.times, b.times);
  EXPECT_NE(a.times, c.times);
}

TEST(SimulateMinimal, JumpBudgetIsATerminal) {
  const auto tr = simulate_minimal(FlipOracle{}, std::int64_t{0}, 1e9, 10, {1, 0});
  EXPECT_EQ(tr.terminal, Terminal::kJumpBudgetExhausted);
  EXPECT_EQ(tr.jumps(), 10u);
}

TEST(SimulateMinimal, HoldingTimeMean) {
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const auto tr = simulate_minimal(FlipOracle{}, std::int64_t{0}, 1e9, 1, {11, std::uint64_t(i)});
    sum += tr.times.at(1);
  }
  EXPECT_NEAR(sum / n, 1.0, 3.0 / std::sqrt(n));
}

TEST(SimulateMinimal, HoldingTimesPassKolmogorovSmirnov) {
  // State 1 of F2 leaves at rate b_1 + a_1 = 3.
  const BdOracle o{testing::f2()};
  const int n = 10000;
  std::vector<double> h;
  for (int i = 0; i < n; ++i) {
    const auto tr = simulate_minimal(o, std::int64_t{1}, 1e9, 1, {12, std::uint64_t(i)});
    h.push_back(tr.times.at(1));
  }
  std::sort(h.begin(), h.end());
  double d = 0;
  for (int i = 0; i < n; ++i) {
    const double f = 1 - std::exp(-3 * h[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  // Asymptotic critical value at alpha = 0.001: sqrt(-log(0.0005) / 2) = 1.949.
  EXPECT_LT(d * std::sqrt(n), 1.949);
}

TEST(SimulateMinimal, JumpChainFrequencies) {
  // From 1 under F2: up with probability b_1 / (a_1 + b_1) = 1/3.
  const BdOracle o{testing::f2()};
  const int n = 10000;
  int up = 0;
  for (int i = 0; i < n; ++i) {
    const auto tr = simulate_minimal(o, std::int64_t{1}, 1e9, 1, {13, std::uint64_t(i)});
    up += tr.states.at(1) == 2 ? 1 : 0;
  }
  const double p = 1.0 / 3;
  EXPECT_NEAR(static_cast<double>(up) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Transient, ZeroTimeIsIdentity) {
  const Generator L = truncate_bd(testing::f1(), -5, 5);
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(11);
  mu0(3) = 0.25;
  mu0(7) = 0.75;
  EXPECT_EQ(transient_distribution(L, mu0, 0.0), mu0);
}

TEST(Transient, TwoStateClosedForm) {
  Generator L(2, 2);
  L << -1, 1, 1, -1;
  Eigen::VectorXd mu0(2);
  mu0 << 1, 0;
  const Eigen::VectorXd mt = transient_distribution(L, mu0, 1.0);
  EXPECT_NEAR(mt(0), (1 + std::exp(-2.0)) / 2, 1e-14);
  EXPECT_NEAR(mt.sum(), 1, 1e-14);
}

TEST(Transient, StiffTwoStateClosedForm) {
  // q t = 3e4 at t = 1 takes the scaling-and-squaring path.
  Generator L(2, 2);
  L << -1e4, 1e4, 3e4, -3e4;
  Eigen::VectorXd mu0(2);
  mu0 << 0, 1;
  const Eigen::VectorXd mt = transient_distribution(L, mu0, 1.0);
  EXPECT_NEAR(mt(0), 0.75, 1e-12);
  const double t = 1e-4;
  const Eigen::VectorXd ms = transient_distribution(L, mu0, t);
  EXPECT_NEAR(ms(0), 0.75 * (1 - std::exp(-4e4 * t)), 1e-12);
}

TEST(Transient, RowSumsAndSemigroup) {
  // Rates up to 2^11 on [-11, 11]; t = 3 exceeds the uniformization range.
  const Generator L = truncate_bd(testing::f1(), -11, 11);
  for (double t : {0.01, 0.5, 3.0}) {
    const Eigen::MatrixXd P = transition_matrix(L, t);
    for (int i = 0; i < P.rows(); ++i) EXPECT_NEAR(P.row(i).sum(), 1, 1e-10) << t;
    EXPECT_GE(P.minCoeff(), -1e-15);
  }
  const Eigen::MatrixXd Ps = transition_matrix(L, 1.5), Pt = transition_matrix(L, 3.0);
  EXPECT_LT((Ps * Ps - Pt).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Transient, ValidatesGenerator) {
  Generator bad(2, 3);
  bad.setZero();
  try {
    validate_generator(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonSquare);
  }
  Generator rows(2, 2);
  rows << -1, 0.5, 1, -1;
  try {
    transient_distribution(rows, Eigen::VectorXd::Ones(2) / 2, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadRowSums);
  }
}

TEST(TruncateBd, SingletonWindowIsZero) {
  const Generator L = truncate_bd(testing::f2(), 0, 0);
  ASSERT_EQ(L.rows(), 1);
  ASSERT_EQ(L.cols(), 1);
  EXPECT_EQ(L(0, 0), 0.0);
}

TEST(TruncateBd, F2InteriorRows) {
  const Generator L = truncate_bd(testing::f2(), -5, 5);
  for (int n = -4; n <= 4; ++n) {
    const int i = n + 5;
    const double a = n > 0 ? 2 : 1, b = n < 0 ? 2 : 1;
    EXPECT_EQ(L(i, i - 1), a) << n;
    EXPECT_EQ(L(i, i + 1), b) << n;
    EXPECT_EQ(L(i, i), -a - b) << n;
  }
  // Reflecting ends.
  EXPECT_EQ(L(0, 0), -L(0, 1));
  EXPECT_EQ(L(10, 10), -L(10, 9));
}

TEST(TruncateBd, StationaryVectorMatchesClosedForm) {
  for (std::int64_t k : {30, 40}) {
    const Generator L = truncate_bd(testing::f1(), -k, k);
    const int n = static_cast<int>(L.rows());
    // pi L = 0 with sum(pi) = 1: replace one equation by the normalization.
    Eigen::MatrixXd A = L.transpose();
    A.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1;
    const Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
    double z = 0;
    for (std::int64_t m = -k; m <= k; ++m) z += testing::mu_f(m);
    for (std::int64_t m = -k; m <= k; ++m) {
      EXPECT_NEAR(pi(m + k), testing::mu_f(m) / z, 1e-8) << m;
    }
  }
}

}  // namespace
}  // namespace sstlab
