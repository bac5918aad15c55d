#pragma once

#include <string>

#include "pnmpc/ocp/types.hpp"

namespace pnmpc::ocp {

/// Dense convex QP
///
///   min 0.5 z'Hz + g'z   s.t.  lo <= z <= hi,  C z <= d
///
/// H must be symmetric positive definite. Infinite bounds are ignored.
struct QpProblem {
  Mat H;
  Vec g;
  Vec lo, hi;
  Mat C;
  Vec d;
};

enum class QpStatus { optimal, infeasible, not_convex, iteration_limit };

std::string to_string(QpStatus s);

/// Solution with nonnegative multipliers satisfying
///   H z + g - lam_lo + lam_hi + C' lam_c = 0.
struct QpSolution {
  Vec z;
  Vec lam_lo, lam_hi, lam_c;
  double objective = 0.0;
  int iterations = 0;
  QpStatus status = QpStatus::infeasible;
};

/// Goldfarb-Idnani dual active-set method. The working set is kept as a
/// QR-like factorisation (J, R) updated with Givens rotations, so adding or
/// dropping a constraint costs O(n^2).
QpSolution solve_qp(const QpProblem& qp, int max_iterations = 0);

}  // namespace pnmpc::ocp
