#include "qmservo/qp.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace qm {

namespace {

void finalize(QpResult& r, const MatX& H, const VecX& g, const MatX& A, const VecX& b) {
  r.objective = 0.5 * r.x.dot(H * r.x) + g.dot(r.x);
  r.stationarity = (H * r.x + g + A.transpose() * r.lambda).lpNorm<Eigen::Infinity>();
  if (A.rows() > 0) {
    const VecX slack = A * r.x - b;
    r.primal_residual = std::max(0.0, slack.maxCoeff());
    r.complementarity = (r.lambda.array() * slack.array()).abs().maxCoeff();
  }
}

}  // namespace

QpResult solveQp(const MatX& H, const VecX& g, const MatX& A, const VecX& b, const VecX& x0,
                 int max_iterations) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(A.rows());

  QpResult r;
  r.x = x0;
  r.lambda = VecX::Zero(m);

  std::vector<int> W;  // working set
  const double tol_step = 1e-11;
  const double tol_lambda = -1e-10;

  for (int iter = 0; iter < max_iterations; ++iter) {
    r.iterations = iter + 1;
    const int k = static_cast<int>(W.size());

    // Equality-constrained subproblem on the working set.
    MatX K = MatX::Zero(n + k, n + k);
    K.topLeftCorner(n, n) = H;
    for (int j = 0; j < k; ++j) {
      K.block(n + j, 0, 1, n) = A.row(W[static_cast<size_t>(j)]);
      K.block(0, n + j, n, 1) = A.row(W[static_cast<size_t>(j)]).transpose();
    }
    VecX rhs = VecX::Zero(n + k);
    rhs.head(n) = -(H * r.x + g);
    const VecX sol = K.partialPivLu().solve(rhs);
    const VecX d = sol.head(n);
    const VecX lam_W = sol.tail(k);

    bool at_subproblem_optimum =
        d.lpNorm<Eigen::Infinity>() < tol_step * std::max(1.0, r.x.lpNorm<Eigen::Infinity>());

    if (!at_subproblem_optimum) {
      // Step length to the nearest blocking constraint.
      double alpha = 1.0;
      int blocking = -1;
      const VecX Ad = A * d;
      const VecX slack = b - A * r.x;
      for (int i = 0; i < m; ++i) {
        if (std::find(W.begin(), W.end(), i) != W.end()) continue;
        if (Ad[i] > 1e-14) {
          const double a_i = slack[i] / Ad[i];
          if (a_i < alpha) {
            alpha = a_i;
            blocking = i;
          }
        }
      }
      r.x += std::max(0.0, alpha) * d;
      if (blocking >= 0 && static_cast<int>(W.size()) < n) {
        W.push_back(blocking);
        continue;
      }
      // A full step lands exactly on the working-set minimizer; fall through
      // to the multiplier check instead of waiting for d to shrink (which it
      // may never do when H is nearly singular).
      at_subproblem_optimum = true;
    }

    if (at_subproblem_optimum) {
      int worst = -1;
      double worst_lam = tol_lambda;
      for (int j = 0; j < k; ++j) {
        if (lam_W[j] < worst_lam) {
          worst_lam = lam_W[j];
          worst = j;
        }
      }
      if (worst < 0) {
        r.lambda.setZero();
        for (int j = 0; j < k; ++j) r.lambda[W[static_cast<size_t>(j)]] = std::max(0.0, lam_W[j]);
        r.converged = true;
        finalize(r, H, g, A, b);
        return r;
      }
      W.erase(W.begin() + worst);
    }
  }

  // Iteration cap reached: report the best iterate with diagnostics.
  r.converged = false;
  finalize(r, H, g, A, b);
  return r;
}

}  // namespace qm
