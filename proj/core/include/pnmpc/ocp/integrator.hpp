#pragma once

#include <functional>
#include <vector>

#include "pnmpc/ocp/types.hpp"

namespace pnmpc::ocp {

/// Continuous-time model x_dot = f(x, u, p). Writes into `xdot`, which is
/// pre-sized to nx by the caller.
using Dynamics = std::function<void(VecCRef x, VecCRef u, VecCRef p, VecRef xdot)>;

/// Scratch buffers for repeated RK4 steps without allocation.
struct Rk4Workspace {
  Vec k1, k2, k3, k4, tmp, cur;
  void resize(Eigen::Index nx);
};

/// One classical RK4 step of length `ts`. Throws IntegrationError (stage
/// `stage`) if f returns a non-finite value.
Vec integrate_rk4(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts, int stage = 0);

/// Allocation-free variant; `out` may not alias `x`.
void integrate_rk4(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts,
                   Rk4Workspace& ws, VecRef out, int stage = 0);

/// Discrete step map f_d: `substeps` RK4 steps of ts/substeps each.
void discrete_step(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts, int substeps,
                   Rk4Workspace& ws, VecRef out, int stage = 0);

struct Linearization {
  Mat A;  // d f_d / d x
  Mat B;  // d f_d / d u
};

/// Central finite-difference Jacobians of f_d, h = max(1e-6, 1e-6 |v|).
/// Coordinates listed as passive are ones f never reads: their A column is
/// the unit vector and their B column is zero, without evaluating f.
Linearization linearize(const Dynamics& f, VecCRef x, VecCRef u, VecCRef p, double ts,
                        int substeps = 1, int stage = 0,
                        const std::vector<int>& passive_states = {},
                        const std::vector<int>& passive_controls = {});

/// Central-difference step used throughout the solver.
inline double fd_step(double v) { return std::max(1e-6, 1e-6 * std::abs(v)); }

}  // namespace pnmpc::ocp
