#include "curesurv/optim.hpp"

#include <cmath>
#include <limits>

namespace curesurv {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr double kLooseGtol = 1e-4;
constexpr double kMaxStep = 5.0;  // cap on ||step||_inf of a full quasi-Newton step

}  // namespace

BfgsResult maximize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                         const GradientFunction& grad, Eigen::VectorXd x0,
                         const BfgsOptions& options) {
  BfgsResult res;
  const Eigen::Index d = x0.size();
  res.x = std::move(x0);
  res.value = f(res.x);
  res.gradient = Eigen::VectorXd::Zero(d);
  if (!std::isfinite(res.value)) {
    res.message = "objective not finite at the starting point";
    return res;
  }
  if (!grad(res.x, res.gradient) || !res.gradient.allFinite()) {
    res.message = "gradient not available at the starting point";
    return res;
  }

  // H approximates the inverse of the negative Hessian (minimizing -f).
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
  bool fresh = true;
  if (options.initial_inverse_hessian && options.initial_inverse_hessian->rows() == d &&
      options.initial_inverse_hessian->cols() == d) {
    H = *options.initial_inverse_hessian;
    fresh = false;
  }
  int small_changes = 0;
  Eigen::VectorXd g_new(d);

  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    const double gnorm = res.gradient.lpNorm<Eigen::Infinity>();
    if (gnorm <= options.gtol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }

    Eigen::VectorXd p = H * res.gradient;
    double slope = res.gradient.dot(p);
    if (!(slope > 0.0)) {
      H.setIdentity();
      fresh = true;
      p = res.gradient;
      slope = res.gradient.dot(p);
    }
    double t = 1.0;
    const double pmax = p.lpNorm<Eigen::Infinity>();
    if (pmax * t > kMaxStep) t = kMaxStep / pmax;

    // Backtracking; -inf or NaN counts as a rejected trial point.
    Eigen::VectorXd x_new;
    double f_new = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k, t *= 0.5) {
      x_new = res.x + t * p;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new >= res.value + kArmijo * t * slope &&
          grad(x_new, g_new) && g_new.allFinite()) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (!fresh) {  // stale curvature: retry along the gradient
        H.setIdentity();
        fresh = true;
        continue;
      }
      res.converged = gnorm <= kLooseGtol;
      res.message = res.converged ? "line search stalled at a near-stationary point"
                                  : "line search failed";
      return res;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = res.gradient - g_new;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) {
        H *= sy / y.squaredNorm();
        fresh = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      H += (rho + rho * rho * y.dot(Hy)) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }

    const double rel = std::fabs(f_new - res.value) / std::max(1.0, std::fabs(res.value));
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
    small_changes = rel <= options.ftol ? small_changes + 1 : 0;
    if (small_changes >= 2 && res.gradient.lpNorm<Eigen::Infinity>() <= kLooseGtol) {
      ++res.iterations;
      res.converged = true;
      res.message = "relative change tolerance reached";
      return res;
    }
  }
  res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= options.gtol;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

}  // namespace curesurv
