#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pnmpc/ocp/integrator.hpp"

namespace pnmpc::ocp {

/// Per-stage residual r(x, u, p); the stage cost is sum_i w_i r_i^2.
using Residual = std::function<void(VecCRef x, VecCRef u, VecCRef p, VecRef r)>;

/// Per-stage inequality h(x, u, p) <= 0. Soft constraints are written with
/// their slack as one of the controls, e.g. (sigma - sigma_ref) - eps <= 0.
using PathConstraint = std::function<void(VecCRef x, VecCRef u, VecCRef p, VecRef h)>;

/// Finite-horizon optimal control problem
///
///   min  sum_{n=0}^{N-1} sum_i w_i r_i(x_n, u_n, p_n)^2
///   s.t. x_0 = x0,  x_{n+1} = f_d(x_n, u_n, p_n)
///        x_lo <= x_n <= x_hi   (n = 1..N)
///        u_lo <= u_n <= u_hi   (n = 0..N-1)
///        h(x_n, u_n, p_n) <= 0 (n = 0..N-1)
///
/// Bounds are stored column-per-stage so that they may vary along the
/// horizon. Infinite entries mean "unbounded".
struct OcpProblem {
  int N = 1;
  double Ts = 0.1;
  int nx = 0;
  int nu = 0;
  int np = 0;
  int nr = 0;
  int nc = 0;
  int substeps = 1;  // RK4 steps per stage inside f_d

  Dynamics dynamics;
  Residual residual;
  PathConstraint constraints;  // may be empty when nc == 0

  Vec weights;  // nr
  Mat x_lo, x_hi;  // nx x (N+1)
  Mat u_lo, u_hi;  // nu x N
  Mat params;      // np x N
  Vec x0;

  // Indices of states/controls the dynamics never read (see linearize).
  std::vector<int> passive_states;
  std::vector<int> passive_controls;

  // Optional variable scaling for the subproblem; defaults to ones.
  Vec x_scale;
  Vec u_scale;

  /// Horizon length N * Ts.
  double horizon() const { return N * Ts; }

  /// Sizes all bound/parameter storage for the current N/nx/nu/np with
  /// unbounded states and controls.
  void allocate();

  void set_state_bounds(const Vec& lo, const Vec& hi);
  void set_control_bounds(const Vec& lo, const Vec& hi);

  /// Throws ConfigError describing the first inconsistency found.
  void validate() const;
};

struct Trajectory {
  Mat states;    // nx x (N+1)
  Mat controls;  // nu x N

  int horizon() const { return static_cast<int>(controls.cols()); }
};

enum class SolveStatus { converged, max_iter_reached, failed };

std::string to_string(SolveStatus s);

struct SolveResult {
  Trajectory trajectory;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::failed;
  bool x0_clipped = false;
  std::string message;
};

struct SolverConfig {
  int max_sqp_iters = 10;
  double qp_tolerance = 1e-6;
  double levenberg_regularization = 1e-9;
  bool warm_start = true;
  double backtrack_factor = 0.5;
  int max_backtracks = 8;
};

/// Shift one stage earlier, duplicating the final state/control.
Trajectory shift_warm_start(const Trajectory& traj);

}  // namespace pnmpc::ocp
