#pragma once

#include "qmservo/types.hpp"

namespace qm {

// Result of min 0.5 x'Hx + g'x  s.t.  Ax <= b.
struct QpResult {
  VecX x;
  VecX lambda;               // multipliers, zero off the active set
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double stationarity = 0.0;      // ||Hx + g + A'lambda||_inf
  double primal_residual = 0.0;   // max(0, max_i (Ax - b)_i)
  double complementarity = 0.0;   // max_i |lambda_i (Ax - b)_i|
};

// Dense primal active-set solver for strictly convex QPs. `x0` must be
// feasible (the MPC warm start uses a strictly interior force guess).
QpResult solveQp(const MatX& H, const VecX& g, const MatX& A, const VecX& b, const VecX& x0,
                 int max_iterations = 300);

}  // namespace qm
