#include "sstlab/ctmc.hpp"

#include <cmath>
#include <string>

#include "sstlab/error.hpp"

namespace sstlab {

const char* terminal_name(Terminal t) {
  switch (t) {
    case Terminal::kHorizonReached: return "HorizonReached";
    case Terminal::kAbsorbed: return "Absorbed";
    case Terminal::kJumpBudgetExhausted: return "JumpBudgetExhausted";
    case Terminal::kExploded: return "Exploded";
  }
  return "?";
}

void validate_generator(const Generator& L) {
  if (L.rows() != L.cols()) {
    throw Error(ErrorCode::kNonSquare, std::to_string(L.rows()) + "x" +
                                           std::to_string(L.cols()) + " generator");
  }
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      if (i != j && L(i, j) < 0) {
        throw Error(ErrorCode::kBadRowSums, "negative off-diagonal entry in row " +
                                                std::to_string(i));
      }
      s += L(i, j);
    }
    if (std::abs(s) > 1e-10 * std::max(1.0, std::abs(L(i, i)))) {
      throw Error(ErrorCode::kBadRowSums, "row " + std::to_string(i) + " sums to " +
                                              std::to_string(s));
    }
  }
}

namespace {

constexpr double kUniformizationLimit = 4096;
constexpr double kPoissonTail = 1e-14;

double max_exit(const Generator& L) {
  double q = 0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) q = std::max(q, -L(i, i));
  return q;
}

// Uniformized one-step matrix I + L/q with the diagonal recomputed from the
// off-diagonal row so that rows sum to one exactly in exact arithmetic.
Eigen::MatrixXd uniformized(const Generator& L, double q) {
  Eigen::MatrixXd P = L / q;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    double off = 0;
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      if (j != i) off += P(i, j);
    }
    P(i, i) = std::max(0.0, 1.0 - off);
  }
  return P;
}

// Applies sum_k Pois(k; qt) v P^k for a row vector v.
Eigen::RowVectorXd uniformize_apply(const Eigen::MatrixXd& P, Eigen::RowVectorXd v,
                                    double qt) {
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(v.size());
  double cum = 0;
  const double log_qt = std::log(qt);
  for (long k = 0;; ++k) {
    const double w = std::exp(-qt + k * log_qt - std::lgamma(k + 1.0));
    acc += w * v;
    cum += w;
    if (k > qt && 1.0 - cum < kPoissonTail) break;
    if (k > 10 * qt + 1000) break;
    v = v * P;
  }
  return acc;
}

using Quad = __float128;

struct QuadMatrix {
  long n;
  std::vector<Quad> a;
  explicit QuadMatrix(long n_) : n(n_), a(static_cast<size_t>(n_ * n_), 0) {}
  Quad& operator()(long i, long j) { return a[i * n + j]; }
  Quad operator()(long i, long j) const { return a[i * n + j]; }
};

QuadMatrix multiply(const QuadMatrix& x, const QuadMatrix& y) {
  QuadMatrix z(x.n);
  const long n = x.n;
  for (long i = 0; i < n; ++i) {
    Quad* zi = &z.a[i * n];
    for (long k = 0; k < n; ++k) {
      const Quad xik = x.a[i * n + k];
      if (xik == 0) continue;
      const Quad* yk = &y.a[k * n];
      for (long j = 0; j < n; ++j) zi[j] += xik * yk[j];
    }
  }
  return z;
}

Quad quad_exp(Quad x) {
  // e^x for x <= 0 via halving and a Taylor series.
  int halvings = 0;
  while (x < Quad(-0.125)) {
    x /= 2;
    ++halvings;
  }
  Quad term = 1, sum = 1;
  for (int k = 1; k < 40; ++k) {
    term *= x / k;
    sum += term;
  }
  for (int i = 0; i < halvings; ++i) sum *= sum;
  return sum;
}

Eigen::MatrixXd quad_transition_matrix(const Generator& L, double q, double t) {
  const long n = L.rows();
  // h = t / 2^s with q h <= 1/64.
  int s = 0;
  Quad qh = static_cast<Quad>(q) * static_cast<Quad>(t);
  while (qh > Quad(1) / 64) {
    qh /= 2;
    ++s;
  }
  // Uniformized step A = I + L/q in binary128; diagonal from the row.
  QuadMatrix A(n);
  for (long i = 0; i < n; ++i) {
    Quad off = 0;
    for (long j = 0; j < n; ++j) {
      if (j == i) continue;
      A(i, j) = static_cast<Quad>(L(i, j)) / static_cast<Quad>(q);
      off += A(i, j);
    }
    A(i, i) = 1 - off;
    if (A(i, i) < 0) A(i, i) = 0;
  }
  // P(h) = e^{-qh} sum_k (qh)^k / k! A^k, Horner form, truncated once the
  // coefficient falls below 1e-36.
  std::vector<Quad> c{1};
  while (c.back() > Quad(1e-36)) c.push_back(c.back() * qh / static_cast<Quad>(c.size()));
  const Quad scale = quad_exp(-qh);
  QuadMatrix P(n);
  for (long i = 0; i < n; ++i) P(i, i) = c.back();
  for (size_t k = c.size() - 1; k-- > 0;) {
    P = multiply(A, P);
    for (long i = 0; i < n; ++i) P(i, i) += c[k];
  }
  for (Quad& v : P.a) v *= scale;
  for (int i = 0; i < s; ++i) P = multiply(P, P);
  Eigen::MatrixXd out(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) out(i, j) = static_cast<double>(P(i, j));
  }
  return out;
}

}  // namespace

Eigen::MatrixXd transition_matrix(const Generator& L, double t) {
  validate_generator(L);
  const long n = L.rows();
  const double q = max_exit(L);
  if (t == 0 || q == 0) return Eigen::MatrixXd::Identity(n, n);
  if (q * t <= kUniformizationLimit) {
    const Eigen::MatrixXd P = uniformized(L, q);
    Eigen::MatrixXd out(n, n);
    for (long i = 0; i < n; ++i) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
      e(i) = 1;
      out.row(i) = uniformize_apply(P, e, q * t);
    }
    return out;
  }
  return quad_transition_matrix(L, q, t);
}

Eigen::VectorXd transient_distribution(const Generator& L, const Eigen::VectorXd& mu0,
                                       double t) {
  validate_generator(L);
  if (mu0.size() != L.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "initial law has the wrong length");
  }
  if (t == 0) return mu0;
  const double q = max_exit(L);
  if (q == 0) return mu0;
  if (q * t <= kUniformizationLimit) {
    return uniformize_apply(uniformized(L, q), mu0.transpose(), q * t).transpose();
  }
  return (mu0.transpose() * quad_transition_matrix(L, q, t)).transpose();
}

Generator truncate_bd(const BDRates& rates, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw Error(ErrorCode::kInvalidArgument, "empty window");
  const long n = static_cast<long>(hi - lo + 1);
  Generator L = Generator::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    const std::int64_t x = lo + i;
    if (i + 1 < n) L(i, i + 1) = rates.birth(x);
    if (i > 0) L(i, i - 1) = rates.death(x);
    L(i, i) = -(L.row(i).sum());
  }
  return L;
}

}  // namespace sstlab
