#pragma once

#include "pnmpc/ocp/problem.hpp"
#include "pnmpc/ocp/qp.hpp"

namespace pnmpc::ocp {

/// Gauss-Newton SQP on a single-shooting, condensed formulation.
///
/// Each iteration forward simulates, linearises the step map, residuals and
/// path constraints by central differences, condenses the states out, solves
/// the resulting QP in the (scaled) controls and backtracks on
/// cost + penalty * constraint violation.
class SqpSolver {
 public:
  explicit SqpSolver(SolverConfig config = {}) : config_(config) {}

  SolveResult solve(const OcpProblem& problem, const Trajectory* warm = nullptr);

  const SolverConfig& config() const { return config_; }
  SolverConfig& config() { return config_; }

 private:
  SolverConfig config_;
};

/// Convenience wrapper around SqpSolver.
SolveResult solve(const OcpProblem& problem, const SolverConfig& config,
                  const Trajectory* warm = nullptr);

/// Objective of a trajectory (sum of weighted squared residuals).
double evaluate_objective(const OcpProblem& problem, const Trajectory& traj);

/// Single-shooting rollout of `controls` from problem.x0.
Trajectory simulate(const OcpProblem& problem, const Mat& controls);

}  // namespace pnmpc::ocp
