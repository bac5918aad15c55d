#include "pnmpc/ocp/problem.hpp"

#include <limits>
#include <sstream>

#include "pnmpc/errors.hpp"

namespace pnmpc::ocp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("OcpProblem: " + what);
}
}  // namespace

void OcpProblem::allocate() {
  x_lo = Mat::Constant(nx, N + 1, -kInf);
  x_hi = Mat::Constant(nx, N + 1, kInf);
  u_lo = Mat::Constant(nu, N, -kInf);
  u_hi = Mat::Constant(nu, N, kInf);
  params = Mat::Zero(np, N);
  if (weights.size() != nr) weights = Vec::Ones(nr);
  if (x0.size() != nx) x0 = Vec::Zero(nx);
  x_scale = Vec::Ones(nx);
  u_scale = Vec::Ones(nu);
}

void OcpProblem::set_state_bounds(const Vec& lo, const Vec& hi) {
  require(lo.size() == nx && hi.size() == nx, "state bound size");
  x_lo = lo.replicate(1, N + 1);
  x_hi = hi.replicate(1, N + 1);
}

void OcpProblem::set_control_bounds(const Vec& lo, const Vec& hi) {
  require(lo.size() == nu && hi.size() == nu, "control bound size");
  u_lo = lo.replicate(1, N);
  u_hi = hi.replicate(1, N);
}

void OcpProblem::validate() const {
  require(N >= 1, "N must be >= 1");
  require(Ts > 0.0, "Ts must be > 0");
  require(nx >= 1 && nu >= 1, "nx and nu must be >= 1");
  require(np >= 0 && nr >= 0 && nc >= 0, "negative dimension");
  require(substeps >= 1, "substeps must be >= 1");
  require(static_cast<bool>(dynamics), "dynamics evaluator missing");
  require(nr == 0 || static_cast<bool>(residual), "residual evaluator missing");
  require(nc == 0 || static_cast<bool>(constraints), "constraint evaluator missing");
  require(weights.size() == nr, "weights must have nr entries");
  require((weights.array() >= 0.0).all(), "weights must be nonnegative");
  require(x_lo.rows() == nx && x_lo.cols() == N + 1, "x_lo must be nx x (N+1)");
  require(x_hi.rows() == nx && x_hi.cols() == N + 1, "x_hi must be nx x (N+1)");
  require(u_lo.rows() == nu && u_lo.cols() == N, "u_lo must be nu x N");
  require(u_hi.rows() == nu && u_hi.cols() == N, "u_hi must be nu x N");
  require(params.rows() == np && params.cols() == N, "params must be np x N");
  require(x0.size() == nx, "x0 must have nx entries");
  require(x0.allFinite(), "x0 must be finite");
  require((x_lo.array() <= x_hi.array()).all(), "state lower bound above upper bound");
  require((u_lo.array() <= u_hi.array()).all(), "control lower bound above upper bound");
  require(x_scale.size() == nx && (x_scale.array() > 0.0).all(), "x_scale must be positive");
  for (int i : passive_states) require(i >= 0 && i < nx, "passive state index out of range");
  for (int j : passive_controls) require(j >= 0 && j < nu, "passive control index out of range");
  require(u_scale.size() == nu && (u_scale.array() > 0.0).all(), "u_scale must be positive");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter_reached: return "max_iter_reached";
    case SolveStatus::failed: return "failed";
  }
  return "unknown";
}

Trajectory shift_warm_start(const Trajectory& traj) {
  Trajectory out = traj;
  const auto n = traj.controls.cols();
  const auto ns = traj.states.cols();
  if (n > 1) out.controls.leftCols(n - 1) = traj.controls.rightCols(n - 1);
  if (ns > 1) out.states.leftCols(ns - 1) = traj.states.rightCols(ns - 1);
  return out;
}

}  // namespace pnmpc::ocp
