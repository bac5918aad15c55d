#include "pnmpc/ocp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pnmpc::ocp {

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::not_convex: return "not_convex";
    case QpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Every constraint is brought into the form  n'z >= b.
enum class Kind { lower, upper, general };

struct Row {
  Kind kind;
  Eigen::Index index;  // variable index for bounds, row of C otherwise
  double b;
};

class ConstraintSet {
 public:
  ConstraintSet(const QpProblem& qp) : qp_(qp) {
    const auto n = qp.g.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (qp.lo.size() == n && std::isfinite(qp.lo[i])) rows_.push_back({Kind::lower, i, qp.lo[i]});
      if (qp.hi.size() == n && std::isfinite(qp.hi[i])) rows_.push_back({Kind::upper, i, -qp.hi[i]});
    }
    for (Eigen::Index k = 0; k < qp.C.rows(); ++k)
      if (std::isfinite(qp.d[k])) rows_.push_back({Kind::general, k, -qp.d[k]});
  }

  std::size_t size() const { return rows_.size(); }
  const Row& row(std::size_t k) const { return rows_[k]; }

  // s_k = n_k'z - b_k  (>= 0 means satisfied)
  double slack(std::size_t k, const Vec& z) const {
    const Row& r = rows_[k];
    switch (r.kind) {
      case Kind::lower: return z[r.index] - r.b;
      case Kind::upper: return -z[r.index] - r.b;
      case Kind::general: return -qp_.C.row(r.index).dot(z) - r.b;
    }
    return 0.0;
  }

  // d = J' n_k
  void project(std::size_t k, const Mat& J, Vec& d) const {
    const Row& r = rows_[k];
    switch (r.kind) {
      case Kind::lower: d = J.row(r.index).transpose(); break;
      case Kind::upper: d = -J.row(r.index).transpose(); break;
      case Kind::general: d = -(J.transpose() * qp_.C.row(r.index).transpose()); break;
    }
  }

 private:
  const QpProblem& qp_;
  std::vector<Row> rows_;
};

// Rotation (c, s) with [c s; -s c] [a; b] = [h; 0].
inline void givens(double a, double b, double& c, double& s, double& h) {
  h = std::hypot(a, b);
  if (h == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  c = a / h;
  s = b / h;
}

struct Factorization {
  Mat J;  // columns: [J1 | J2], J1' N = R, J2' N = 0
  Mat R;
  Eigen::Index iq = 0;
  double r_norm = 1.0;

  // Zero d(iq+1..n-1) with rotations applied to J, then append d(0..iq) to R.
  bool add(Vec& d) {
    const auto n = J.rows();
    for (Eigen::Index j = n - 1; j >= iq + 1; --j) {
      double c, s, h;
      givens(d[j - 1], d[j], c, s, h);
      if (h == 0.0) continue;
      d[j - 1] = h;
      d[j] = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double a = J(k, j - 1), b = J(k, j);
        J(k, j - 1) = c * a + s * b;
        J(k, j) = -s * a + c * b;
      }
    }
    R.col(iq).head(iq + 1) = d.head(iq + 1);
    ++iq;
    if (std::abs(d[iq - 1]) <= kEps * r_norm) return false;
    r_norm = std::max(r_norm, std::abs(d[iq - 1]));
    return true;
  }

  // Remove active column `pos` and restore triangularity.
  void drop(Eigen::Index pos) {
    const auto n = J.rows();
    for (Eigen::Index i = pos; i < iq - 1; ++i) R.col(i) = R.col(i + 1);
    R.col(iq - 1).setZero();
    --iq;
    for (Eigen::Index j = pos; j < iq; ++j) {
      double c, s, h;
      givens(R(j, j), R(j + 1, j), c, s, h);
      if (h == 0.0) continue;
      R(j, j) = h;
      R(j + 1, j) = 0.0;
      for (Eigen::Index k = j + 1; k < iq; ++k) {
        const double a = R(j, k), b = R(j + 1, k);
        R(j, k) = c * a + s * b;
        R(j + 1, k) = -s * a + c * b;
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const double a = J(k, j), b = J(k, j + 1);
        J(k, j) = c * a + s * b;
        J(k, j + 1) = -s * a + c * b;
      }
    }
  }
};

}  // namespace

QpSolution solve_qp(const QpProblem& qp, int max_iterations) {
  const auto n = qp.g.size();
  QpSolution sol;
  sol.z = Vec::Zero(n);
  sol.lam_lo = Vec::Zero(n);
  sol.lam_hi = Vec::Zero(n);
  sol.lam_c = Vec::Zero(qp.C.rows());

  Eigen::LLT<Mat> chol(qp.H);
  if (chol.info() != Eigen::Success) {
    sol.status = QpStatus::not_convex;
    return sol;
  }

  ConstraintSet cs(qp);
  const std::size_t m = cs.size();
  if (max_iterations <= 0) max_iterations = 10 * static_cast<int>(n + m) + 50;

  Factorization fac;
  fac.J = chol.matrixU().solve(Mat::Identity(n, n));
  fac.R = Mat::Zero(n, n);

  Vec& x = sol.z;
  x = -chol.solve(qp.g);

  // Tolerance on primal violation relative to the problem data scale.
  const double scale = 1.0 + qp.g.lpNorm<Eigen::Infinity>() + x.lpNorm<Eigen::Infinity>();
  const double feas_tol = 1e-11 * scale;

  std::vector<std::size_t> active;  // constraint ids, aligned with R columns
  std::vector<double> u;            // duals, aligned with `active`
  std::vector<char> is_active(m, 0), excluded(m, 0);

  Vec d(n), z(n), r(n);
  int iter = 0;

  auto position_of = [&](std::size_t id) {
    for (std::size_t i = 0; i < active.size(); ++i)
      if (active[i] == id) return static_cast<Eigen::Index>(i);
    return Eigen::Index{-1};
  };
  auto drop_constraint = [&](std::size_t id) {
    const auto pos = position_of(id);
    fac.drop(pos);
    active.erase(active.begin() + pos);
    u.erase(u.begin() + pos);
    is_active[id] = 0;
  };

  for (;;) {
    // Step 1: most violated inactive constraint.
    std::size_t p = m;
    double worst = -feas_tol;
    for (std::size_t k = 0; k < m; ++k) {
      if (is_active[k] || excluded[k]) continue;
      const double s = cs.slack(k, x);
      if (s < worst) {
        worst = s;
        p = k;
      }
    }
    if (p == m) break;

    if (++iter > max_iterations) {
      sol.status = QpStatus::iteration_limit;
      sol.iterations = iter;
      return sol;
    }

    const Vec x_saved = x;
    const std::vector<std::size_t> active_saved = active;
    const std::vector<double> u_saved = u;
    double u_new = 0.0;

    for (;;) {
      // Step 2a: primal direction z and negative dual direction r.
      cs.project(p, fac.J, d);
      const auto iq = fac.iq;
      z = fac.J.rightCols(n - iq) * d.tail(n - iq);
      if (iq > 0)
        r.head(iq) = fac.R.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(d.head(iq));

      // Step 2b: partial (dual) and full (primal) step lengths.
      double t1 = kInf;
      std::size_t blocking = m;
      for (Eigen::Index k = 0; k < iq; ++k) {
        if (r[k] > 0.0) {
          const double t = u[k] / r[k];
          if (t < t1) {
            t1 = t;
            blocking = active[k];
          }
        }
      }
      double t2 = kInf;
      const double s_p = cs.slack(p, x);
      if (z.squaredNorm() > kEps) {
        const Row& row = cs.row(p);
        // z'n_p
        double zn = 0.0;
        switch (row.kind) {
          case Kind::lower: zn = z[row.index]; break;
          case Kind::upper: zn = -z[row.index]; break;
          case Kind::general: zn = -qp.C.row(row.index).dot(z); break;
        }
        t2 = -s_p / zn;
      }
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        sol.status = QpStatus::infeasible;
        sol.iterations = iter;
        return sol;
      }
      if (t2 >= kInf) {
        // Dual step only.
        for (Eigen::Index k = 0; k < iq; ++k) u[k] -= t * r[k];
        u_new += t;
        drop_constraint(blocking);
        continue;
      }

      x += t * z;
      for (Eigen::Index k = 0; k < iq; ++k) u[k] -= t * r[k];
      u_new += t;

      if (t == t2) {
        cs.project(p, fac.J, d);
        if (!fac.add(d)) {
          // Linearly dependent with the working set: roll back and skip p.
          fac.drop(fac.iq - 1);
          excluded[p] = 1;
          while (!active.empty()) drop_constraint(active.back());
          x = x_saved;
          for (std::size_t i = 0; i < active_saved.size(); ++i) {
            cs.project(active_saved[i], fac.J, d);
            fac.add(d);
            active.push_back(active_saved[i]);
            u.push_back(u_saved[i]);
            is_active[active_saved[i]] = 1;
          }
          break;
        }
        active.push_back(p);
        u.push_back(u_new);
        is_active[p] = 1;
        std::fill(excluded.begin(), excluded.end(), 0);
        break;
      }
      drop_constraint(blocking);
    }
  }

  for (std::size_t i = 0; i < active.size(); ++i) {
    const Row& row = cs.row(active[i]);
    switch (row.kind) {
      case Kind::lower: sol.lam_lo[row.index] = u[i]; break;
      case Kind::upper: sol.lam_hi[row.index] = u[i]; break;
      case Kind::general: sol.lam_c[row.index] = u[i]; break;
    }
  }
  sol.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
  sol.iterations = iter;
  sol.status = QpStatus::optimal;
  return sol;
}

}  // namespace pnmpc::ocp
