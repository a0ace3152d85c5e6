#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace curesurv {

struct BfgsOptions {
  int max_iter = 500;
  double gtol = 1e-6;   // ||g||_inf
  double ftol = 1e-10;  // relative change of the objective
  /// Starting inverse curvature of -f; scaled identity when absent.
  std::optional<Eigen::MatrixXd> initial_inverse_hessian;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Gradient callback: fills `g` and returns false when it cannot be
/// evaluated at x.
using GradientFunction = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& g)>;

/// Quasi-Newton (BFGS) maximization of f. Non-finite values of f are
/// treated as rejected trial points by the backtracking line search.
BfgsResult maximize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                         const GradientFunction& grad, Eigen::VectorXd x0,
                         const BfgsOptions& options = {});

}  // namespace curesurv
