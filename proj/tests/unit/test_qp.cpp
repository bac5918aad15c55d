#include <gtest/gtest.h>

#include <random>

#include "pnmpc/ocp/qp.hpp"

using namespace pnmpc::ocp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute force: enumerate every assignment of each constraint to
// {inactive, active}, solve the equality-constrained KKT system and keep
// the best feasible point. Exponential; only for tiny problems.
Vec brute_force(const QpProblem& qp, double* best_obj) {
  const auto n = qp.g.size();
  std::vector<Vec> rows;
  std::vector<double> rhs;  // a'z = b when active; a'z <= b otherwise
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(qp.lo[i])) {
      rows.push_back(-Vec::Unit(n, i));
      rhs.push_back(-qp.lo[i]);
    }
    if (std::isfinite(qp.hi[i])) {
      rows.push_back(Vec::Unit(n, i));
      rhs.push_back(qp.hi[i]);
    }
  }
  for (Eigen::Index k = 0; k < qp.C.rows(); ++k) {
    rows.push_back(qp.C.row(k).transpose());
    rhs.push_back(qp.d[k]);
  }
  const std::size_t m = rows.size();
  double best = kInf;
  Vec best_z;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::vector<std::size_t> act;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (std::size_t{1} << k)) act.push_back(k);
    if (act.size() > static_cast<std::size_t>(n)) continue;
    const auto q = static_cast<Eigen::Index>(act.size());
    Mat K = Mat::Zero(n + q, n + q);
    Vec b(n + q);
    K.topLeftCorner(n, n) = qp.H;
    b.head(n) = -qp.g;
    for (Eigen::Index j = 0; j < q; ++j) {
      K.block(0, n + j, n, 1) = rows[act[j]];
      K.block(n + j, 0, 1, n) = rows[act[j]].transpose();
      b[n + j] = rhs[act[j]];
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(b);
    const Vec z = sol.head(n);
    bool ok = true;
    for (std::size_t k = 0; k < m && ok; ++k) ok = rows[k].dot(z) <= rhs[k] + 1e-9;
    if (!ok) continue;
    const double obj = 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
    if (obj < best) {
      best = obj;
      best_z = z;
    }
  }
  *best_obj = best;
  return best_z;
}

QpProblem random_qp(std::mt19937& rng, int n, int m_general) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Mat L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L(i, j) = U(rng);
  QpProblem qp;
  qp.H = L * L.transpose() + 0.1 * Mat::Identity(n, n);
  qp.g.resize(n);
  qp.lo.resize(n);
  qp.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    qp.g[i] = 2.0 * U(rng);
    qp.lo[i] = -0.5 + 0.3 * U(rng);
    qp.hi[i] = 0.5 + 0.3 * U(rng);
  }
  qp.C.resize(m_general, n);
  qp.d.resize(m_general);
  for (int k = 0; k < m_general; ++k) {
    for (int i = 0; i < n; ++i) qp.C(k, i) = U(rng);
    qp.d[k] = 0.2 + 0.2 * U(rng);
  }
  return qp;
}

}  // namespace

TEST(DualActiveSetQp, UnconstrainedMinimiser) {
  QpProblem qp;
  qp.H = Mat::Identity(2, 2) * 2.0;
  qp.g = Vec::Constant(2, -4.0);
  qp.lo = Vec::Constant(2, -kInf);
  qp.hi = Vec::Constant(2, kInf);
  const auto s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::optimal);
  EXPECT_NEAR(s.z[0], 2.0, 1e-12);
  EXPECT_NEAR(s.z[1], 2.0, 1e-12);
}

TEST(DualActiveSetQp, ClampsAtBox) {
  QpProblem qp;
  qp.H = Mat::Identity(2, 2);
  qp.g = Vec(2);
  qp.g << -3.0, 1.0;
  qp.lo = Vec::Constant(2, -0.5);
  qp.hi = Vec::Constant(2, 1.0);
  const auto s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::optimal);
  EXPECT_NEAR(s.z[0], 1.0, 1e-12);
  EXPECT_NEAR(s.z[1], -0.5, 1e-12);
  EXPECT_NEAR(s.lam_hi[0], 2.0, 1e-12);
  EXPECT_NEAR(s.lam_lo[1], 0.5, 1e-12);
}

TEST(DualActiveSetQp, DetectsInfeasibility) {
  QpProblem qp;
  qp.H = Mat::Identity(1, 1);
  qp.g = Vec::Zero(1);
  qp.lo = Vec::Constant(1, 1.0);
  qp.hi = Vec::Constant(1, kInf);
  qp.C = Mat::Ones(1, 1);
  qp.d = Vec::Constant(1, 0.0);
  EXPECT_EQ(solve_qp(qp).status, QpStatus::infeasible);
}

TEST(DualActiveSetQp, RejectsIndefiniteHessian) {
  QpProblem qp;
  qp.H = -Mat::Identity(2, 2);
  qp.g = Vec::Zero(2);
  EXPECT_EQ(solve_qp(qp).status, QpStatus::not_convex);
}

TEST(DualActiveSetQp, MatchesActiveSetEnumerationAndKkt) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const int mg = trial % 3;
    QpProblem qp = random_qp(rng, n, mg);
    double ref_obj = 0.0;
    const Vec ref = brute_force(qp, &ref_obj);
    const auto s = solve_qp(qp);
    if (!std::isfinite(ref_obj)) {
      EXPECT_EQ(s.status, QpStatus::infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(s.status, QpStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, ref_obj, 1e-9 * (1.0 + std::abs(ref_obj))) << "trial " << trial;
    EXPECT_LT((s.z - ref).cwiseAbs().maxCoeff(), 1e-7) << "trial " << trial;
    // Stationarity and dual feasibility.
    Vec stat = qp.H * s.z + qp.g - s.lam_lo + s.lam_hi;
    if (mg > 0) stat += qp.C.transpose() * s.lam_c;
    EXPECT_LT(stat.cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
    EXPECT_GE(s.lam_lo.minCoeff(), 0.0);
    EXPECT_GE(s.lam_hi.minCoeff(), 0.0);
    if (mg > 0) EXPECT_GE(s.lam_c.minCoeff(), 0.0);
  }
}

TEST(DualActiveSetQp, DuplicateConstraintsAreHandled) {
  QpProblem qp;
  qp.H = Mat::Identity(2, 2);
  qp.g = Vec::Constant(2, -2.0);
  qp.lo = Vec::Constant(2, -kInf);
  qp.hi = Vec::Constant(2, 0.5);
  qp.C = Mat(2, 2);
  qp.C << 1.0, 0.0, 2.0, 0.0;  // both restate z0 <= 0.5
  qp.d = Vec(2);
  qp.d << 0.5, 1.0;
  const auto s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::optimal);
  EXPECT_NEAR(s.z[0], 0.5, 1e-10);
  EXPECT_NEAR(s.z[1], 0.5, 1e-10);
}
