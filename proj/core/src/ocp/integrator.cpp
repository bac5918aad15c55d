#include "pnmpc/ocp/integrator.hpp"

#include <algorithm>

#include "pnmpc/errors.hpp"

namespace pnmpc::ocp {

void Rk4Workspace::resize(Eigen::Index nx) {
  if (k1.size() == nx) return;
  k1.resize(nx);
  k2.resize(nx);
  k3.resize(nx);
  k4.resize(nx);
  tmp.resize(nx);
  cur.resize(nx);
}

namespace {

void eval(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, VecRef out, int stage) {
  f(x, u, p, out);
  if (!out.allFinite()) throw IntegrationError("non-finite dynamics output", stage);
}

}  // namespace

void integrate_rk4(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts,
                   Rk4Workspace& ws, VecRef out, int stage) {
  ws.resize(x.size());
  eval(f, x, u, p, ws.k1, stage);
  ws.tmp = x + 0.5 * ts * ws.k1;
  eval(f, ws.tmp, u, p, ws.k2, stage);
  ws.tmp = x + 0.5 * ts * ws.k2;
  eval(f, ws.tmp, u, p, ws.k3, stage);
  ws.tmp = x + ts * ws.k3;
  eval(f, ws.tmp, u, p, ws.k4, stage);
  out = x + (ts / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

Vec integrate_rk4(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts, int stage) {
  Rk4Workspace ws;
  Vec out(x.size());
  integrate_rk4(f, x, u, p, ts, ws, out, stage);
  return out;
}

void discrete_step(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts, int substeps,
                   Rk4Workspace& ws, VecRef out, int stage) {
  const double h = ts / substeps;
  ws.resize(x.size());
  integrate_rk4(f, x, u, p, h, ws, out, stage);
  for (int i = 1; i < substeps; ++i) {
    ws.cur = out;
    integrate_rk4(f, ws.cur, u, p, h, ws, out, stage);
  }
}

Linearization linearize(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts,
                        int substeps, int stage, const std::vector<int>& passive_states,
                        const std::vector<int>& passive_controls) {
  const auto nx = x.size();
  const auto nu = u.size();
  Linearization lin{Mat(nx, nx), Mat(nx, nu)};
  Rk4Workspace ws;
  Vec xp = x, up = u, fp(nx), fm(nx);
  auto listed = [](const std::vector<int>& v, Eigen::Index i) {
    return std::find(v.begin(), v.end(), static_cast<int>(i)) != v.end();
  };
  for (Eigen::Index i = 0; i < nx; ++i) {
    if (listed(passive_states, i)) {
      lin.A.col(i).setZero();
      lin.A(i, i) = 1.0;
      continue;
    }
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    discrete_step(f, xp, u, p, ts, substeps, ws, fp, stage);
    xp[i] = x[i] - h;
    discrete_step(f, xp, u, p, ts, substeps, ws, fm, stage);
    xp[i] = x[i];
    lin.A.col(i) = (fp - fm) / (2.0 * h);
  }
  for (Eigen::Index j = 0; j < nu; ++j) {
    if (listed(passive_controls, j)) {
      lin.B.col(j).setZero();
      continue;
    }
    const double h = fd_step(u[j]);
    up[j] = u[j] + h;
    discrete_step(f, x, up, p, ts, substeps, ws, fp, stage);
    up[j] = u[j] - h;
    discrete_step(f, x, up, p, ts, substeps, ws, fm, stage);
    up[j] = u[j];
    lin.B.col(j) = (fp - fm) / (2.0 * h);
  }
  if (!lin.A.allFinite() || !lin.B.allFinite())
    throw IntegrationError("non-finite linearization", stage);
  return lin;
}

}  // namespace pnmpc::ocp
