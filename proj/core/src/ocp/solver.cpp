#include "pnmpc/ocp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pnmpc/errors.hpp"

namespace pnmpc::ocp {

namespace {


void check_dimensions(const OcpProblem& pb, const Trajectory* warm) {
  pb.validate();
  if (warm && (warm->controls.rows() != pb.nu || warm->controls.cols() != pb.N))
    throw ConfigError("warm start dimension mismatch");
}

// Central-difference Jacobians of a stage function g(x, u, p) -> R^m.
template <typename Fn>
void stage_jacobians(const Fn& fn, int m, VecCRef x, VecCRef u, VecCRef p, Vec& val, Mat& jx,
                     Mat& ju) {
  const auto nx = x.size();
  const auto nu = u.size();
  val.resize(m);
  jx.resize(m, nx);
  ju.resize(m, nu);
  fn(x, u, p, val);
  Vec fp(m), fm(m);
  Vec xp = x, up = u;
  for (Eigen::Index i = 0; i < nx; ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    fn(xp, u, p, fp);
    xp[i] = x[i] - h;
    fn(xp, u, p, fm);
    xp[i] = x[i];
    jx.col(i) = (fp - fm) / (2.0 * h);
  }
  for (Eigen::Index j = 0; j < nu; ++j) {
    const double h = fd_step(u[j]);
    up[j] = u[j] + h;
    fn(x, up, p, fp);
    up[j] = u[j] - h;
    fn(x, up, p, fm);
    up[j] = u[j];
    ju.col(j) = (fp - fm) / (2.0 * h);
  }
}

// Sum of positive parts of path constraints and state-bound excursions.
double violation(const OcpProblem& pb, const Trajectory& tr) {
  double v = 0.0;
  Vec h(pb.nc);
  for (int n = 0; n < pb.N; ++n) {
    if (pb.nc > 0) {
      pb.constraints(tr.states.col(n), tr.controls.col(n), pb.params.col(n), h);
      v += h.cwiseMax(0.0).sum();
    }
  }
  for (int n = 1; n <= pb.N; ++n) {
    v += (tr.states.col(n) - pb.x_hi.col(n)).cwiseMax(0.0).sum();
    v += (pb.x_lo.col(n) - tr.states.col(n)).cwiseMax(0.0).sum();
  }
  return v;
}

Mat clamp_controls(const OcpProblem& pb, Mat u) {
  return u.cwiseMax(pb.u_lo).cwiseMin(pb.u_hi);
}

}  // namespace

Trajectory simulate(const OcpProblem& pb, const Mat& controls) {
  Trajectory tr;
  tr.controls = controls;
  tr.states.resize(pb.nx, pb.N + 1);
  tr.states.col(0) = pb.x0;
  Rk4Workspace ws;
  ws.resize(pb.nx);
  Vec next(pb.nx);
  for (int n = 0; n < pb.N; ++n) {
    discrete_step(pb.dynamics, tr.states.col(n), controls.col(n), pb.params.col(n), pb.Ts,
                  pb.substeps, ws, next, n);
    tr.states.col(n + 1) = next;
  }
  return tr;
}

double evaluate_objective(const OcpProblem& pb, const Trajectory& tr) {
  double j = 0.0;
  Vec r(pb.nr);
  for (int n = 0; n < pb.N; ++n) {
    if (pb.nr == 0) break;
    pb.residual(tr.states.col(n), tr.controls.col(n), pb.params.col(n), r);
    j += (pb.weights.array() * r.array().square()).sum();
  }
  return j;
}

SolveResult SqpSolver::solve(const OcpProblem& input, const Trajectory* warm) {
  check_dimensions(input, warm);
  const SolverConfig& cfg = config_;
  if (cfg.max_sqp_iters < 1 || !(cfg.qp_tolerance > 0.0))
    throw ConfigError("SolverConfig: max_sqp_iters >= 1 and qp_tolerance > 0 required");

  SolveResult result;
  OcpProblem pb_clipped;
  const OcpProblem* pbp = &input;
  {
    const Vec lo = input.x_lo.col(0), hi = input.x_hi.col(0);
    if ((input.x0.array() < lo.array()).any() || (input.x0.array() > hi.array()).any()) {
      pb_clipped = input;
      pb_clipped.x0 = input.x0.cwiseMax(lo).cwiseMin(hi);
      pbp = &pb_clipped;
      result.x0_clipped = true;
    }
  }
  const OcpProblem& pb = *pbp;

  const int N = pb.N, nx = pb.nx, nu = pb.nu, nr = pb.nr, nc = pb.nc;
  const int nz = N * nu;

  Mat u0 = (warm && cfg.warm_start) ? warm->controls : Mat::Zero(nu, N);
  u0 = clamp_controls(pb, u0);

  Trajectory cur;
  try {
    cur = simulate(pb, u0);
  } catch (const IntegrationError& e) {
    result.status = SolveStatus::failed;
    result.message = e.what();
    result.trajectory.controls = u0;
    result.trajectory.states = Mat::Constant(nx, N + 1, std::numeric_limits<double>::quiet_NaN());
    result.trajectory.states.col(0) = pb.x0;
    return result;
  }
  double cur_obj = evaluate_objective(pb, cur);
  double penalty = 1.0;

  const Vec su = pb.u_scale;
  const Eigen::Index n_state_rows = [&] {
    Eigen::Index k = 0;
    for (int n = 1; n <= N; ++n)
      for (int i = 0; i < nx; ++i) {
        if (std::isfinite(pb.x_hi(i, n))) ++k;
        if (std::isfinite(pb.x_lo(i, n))) ++k;
      }
    return k;
  }();

  std::vector<Mat> G(N + 1, Mat::Zero(nx, nz));
  Mat M(N * nr, nz);
  Vec rr(N * nr);
  Vec sqrt_w = pb.weights.cwiseSqrt();
  Vec hval, rval;
  Mat hx, hu, rx, ru;

  result.status = SolveStatus::max_iter_reached;
  int iter = 0;
  for (; iter < cfg.max_sqp_iters; ++iter) {
    result.iterations = iter + 1;
    // Linearise and condense.
    Mat C(N * nc + n_state_rows, nz);
    Vec dvec(N * nc + n_state_rows);
    try {
      for (int n = 0; n < N; ++n) {
        const auto x = cur.states.col(n);
        const auto u = cur.controls.col(n);
        const auto p = pb.params.col(n);
        Linearization lin = linearize(pb.dynamics, x, u, p, pb.Ts, pb.substeps, n,
                                      pb.passive_states, pb.passive_controls);
        G[n + 1].leftCols(n * nu) = lin.A * G[n].leftCols(n * nu);
        G[n + 1].middleCols(n * nu, nu) = lin.B * su.asDiagonal();
        G[n + 1].rightCols(nz - (n + 1) * nu).setZero();

        if (nr > 0) {
          stage_jacobians(pb.residual, nr, x, u, p, rval, rx, ru);
          M.middleRows(n * nr, nr) = sqrt_w.asDiagonal() * (rx * G[n]);
          M.block(n * nr, n * nu, nr, nu) += sqrt_w.asDiagonal() * ru * su.asDiagonal();
          rr.segment(n * nr, nr) = sqrt_w.cwiseProduct(rval);
        }
        if (nc > 0) {
          stage_jacobians(pb.constraints, nc, x, u, p, hval, hx, hu);
          C.middleRows(n * nc, nc) = hx * G[n];
          C.block(n * nc, n * nu, nc, nu) += hu * su.asDiagonal();
          dvec.segment(n * nc, nc) = -hval;
        }
      }
    } catch (const IntegrationError& e) {
      result.status = SolveStatus::failed;
      result.message = e.what();
      break;
    }
    {
      Eigen::Index k = N * nc;
      for (int n = 1; n <= N; ++n)
        for (int i = 0; i < nx; ++i) {
          if (std::isfinite(pb.x_hi(i, n))) {
            C.row(k) = G[n].row(i);
            dvec[k++] = pb.x_hi(i, n) - cur.states(i, n);
          }
          if (std::isfinite(pb.x_lo(i, n))) {
            C.row(k) = -G[n].row(i);
            dvec[k++] = cur.states(i, n) - pb.x_lo(i, n);
          }
        }
    }

    QpProblem qp;
    if (nr > 0) {
      qp.H = 2.0 * M.transpose() * M;
      qp.g = 2.0 * M.transpose() * rr;
    } else {
      qp.H = Mat::Zero(nz, nz);
      qp.g = Vec::Zero(nz);
    }
    const double reg = std::max(cfg.levenberg_regularization,
                                1e-12 * (1.0 + qp.H.diagonal().cwiseAbs().maxCoeff()));
    qp.H.diagonal().array() += reg;
    qp.lo.resize(nz);
    qp.hi.resize(nz);
    for (int n = 0; n < N; ++n)
      for (int j = 0; j < nu; ++j) {
        qp.lo[n * nu + j] = (pb.u_lo(j, n) - cur.controls(j, n)) / su[j];
        qp.hi[n * nu + j] = (pb.u_hi(j, n) - cur.controls(j, n)) / su[j];
      }
    qp.C = std::move(C);
    qp.d = std::move(dvec);

    QpSolution qs = solve_qp(qp);
    if (qs.status == QpStatus::infeasible && n_state_rows > 0) {
      // Drop state bounds and retry; path constraints carry slacks.
      QpProblem relaxed = qp;
      relaxed.C = qp.C.topRows(N * nc);
      relaxed.d = qp.d.head(N * nc);
      qs = solve_qp(relaxed);
      if (qs.status == QpStatus::optimal) {
        Vec lam(qp.C.rows());
        lam.setZero();
        lam.head(N * nc) = qs.lam_c;
        qs.lam_c = lam;
        result.message = "state bounds relaxed";
      }
    }
    if (qs.status != QpStatus::optimal) {
      result.status = SolveStatus::failed;
      result.message = "QP " + to_string(qs.status);
      break;
    }

    // KKT residual at the current iterate using the QP multipliers.
    Vec stat = qp.g - qs.lam_lo + qs.lam_hi;
    if (qp.C.rows() > 0) stat += qp.C.transpose() * qs.lam_c;
    double kkt = stat.lpNorm<Eigen::Infinity>();
    for (Eigen::Index k = 0; k < qp.d.size(); ++k) {
      if (!std::isfinite(qp.d[k])) continue;
      kkt = std::max(kkt, -qp.d[k]);  // linearised infeasibility at dz = 0
      kkt = std::max(kkt, std::abs(qs.lam_c[k] * qp.d[k]));
    }
    for (Eigen::Index k = 0; k < nz; ++k) {
      if (std::isfinite(qp.lo[k])) kkt = std::max(kkt, std::abs(qs.lam_lo[k] * qp.lo[k]));
      if (std::isfinite(qp.hi[k])) kkt = std::max(kkt, std::abs(qs.lam_hi[k] * qp.hi[k]));
    }
    result.kkt_residual = kkt;
    if (kkt <= cfg.qp_tolerance) {
      result.status = SolveStatus::converged;
      break;
    }

    // Backtracking on the L1 merit function.
    double lam_max = 0.0;
    if (qs.lam_c.size() > 0) lam_max = qs.lam_c.lpNorm<Eigen::Infinity>();
    penalty = std::max(penalty, 1.5 * lam_max);
    const double v0 = violation(pb, cur);
    const double merit0 = cur_obj + penalty * v0;
    const double slope = qp.g.dot(qs.z) - penalty * v0;

    Mat step(nu, N);
    for (int n = 0; n < N; ++n) step.col(n) = su.cwiseProduct(qs.z.segment(n * nu, nu));

    double alpha = 1.0;
    bool accepted = false;
    Trajectory trial;
    double trial_obj = 0.0;
    for (int k = 0; k <= cfg.max_backtracks; ++k) {
      try {
        trial = simulate(pb, clamp_controls(pb, cur.controls + alpha * step));
        trial_obj = evaluate_objective(pb, trial);
        const double merit = trial_obj + penalty * violation(pb, trial);
        if (std::isfinite(merit) && merit <= merit0 + 1e-4 * alpha * std::min(slope, 0.0)) {
          accepted = true;
          break;
        }
      } catch (const IntegrationError&) {
      }
      alpha *= cfg.backtrack_factor;
    }
    if (!accepted) {
      // No decrease along the direction; keep the iterate.
      result.message = "line search stalled";
      break;
    }
    cur = std::move(trial);
    cur_obj = trial_obj;
  }

  result.trajectory = std::move(cur);
  result.objective = cur_obj;
  return result;
}

SolveResult solve(const OcpProblem& problem, const SolverConfig& config, const Trajectory* warm) {
  SqpSolver solver(config);
  return solver.solve(problem, warm);
}

}  // namespace pnmpc::ocp
