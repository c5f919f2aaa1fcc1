#pragma once

#include <Eigen/Dense>

#include <functional>

namespace tda {

/// Objective returning f(x) and writing the gradient into `grad`.
/// Non-finite values are treated as infeasible points by the line search.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
    int max_iterations = 2000;
    /// Stop when |f_prev - f| / max(1, |f|) falls below this ...
    double rel_tol = 1e-8;
    /// ... and the gradient max-norm is below this.
    double grad_tol = 1e-5;
};

struct BfgsResult {
    Eigen::VectorXd x;
    Eigen::VectorXd grad;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Quasi-Newton minimization with BFGS updates of the inverse Hessian and a
/// line search enforcing the strong Wolfe conditions.
BfgsResult minimize_bfgs(const Objective& fn, Eigen::VectorXd x0, const BfgsOptions& opts = {});

} // namespace tda
