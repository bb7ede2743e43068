#pragma once

#include <Eigen/Dense>
#include <functional>

namespace streamcov {

struct SimplexOptions {
  int max_evals = 4000;
  double ftol = 1e-9;       // spread of simplex values at convergence
  double init_step = 0.4;   // initial vertex displacement per coordinate
  int restarts = 2;         // re-seeded simplexes around the incumbent best
};

struct SimplexResult {
  Eigen::VectorXd x;
  double fmin = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free downhill simplex minimization with restarts.  The
/// objective may return +inf (or any huge value) for infeasible points.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, const SimplexOptions& opt = {});

}  // namespace streamcov
