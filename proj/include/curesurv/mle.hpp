#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curesurv/likelihood.hpp"

namespace curesurv {

struct MleOptions {
  int max_iter = 500;
  double gtol = 1e-6;
  double ftol = 1e-10;
  /// Jittered restarts tried when no start converges.
  int restarts = 8;
  double jitter = 0.5;
  std::uint64_t seed = 20240601;
  double level = 0.95;
  bool compute_covariance = true;
  /// For MO models with no explicit init, also start from the fitted base
  /// model with lambda = 1.
  bool seed_mo_with_base = true;
  /// Inverse negative Hessian (internal scale) to start BFGS with; used by
  /// warm-started refits such as case deletion.
  std::optional<Eigen::MatrixXd> initial_inverse_hessian;
};

using Interval = std::pair<double, double>;

/// Cure fraction at one distinct covariate pattern.
struct PatternCure {
  Eigen::VectorXd x1;
  Eigen::VectorXd x2;
  Eigen::Index count = 0;
  CureFraction cure;
};

struct FitResult {
  ModelSpec spec;
  ParamVector theta_hat;
  double loglik_max = -std::numeric_limits<double>::infinity();
  bool converged = false;
  Eigen::Index n_obs = 0;

  /// Natural scale (lambda via the delta method). Absent when the fit did not
  /// converge or the observed information is singular.
  std::optional<Eigen::MatrixXd> covariance;
  /// Internal scale (log lambda), inverse of the negative Hessian.
  std::optional<Eigen::MatrixXd> covariance_internal;
  /// Reported instead of `covariance` when the information is singular.
  std::optional<Eigen::MatrixXd> pseudo_covariance;
  Eigen::VectorXd std_errors;  // natural scale; NaN when unavailable
  std::vector<Interval> ci;
  double level = 0.95;

  std::vector<PatternCure> cure_estimates;
  Eigen::Index clamped_rows = 0;
  double grad_norm = 0.0;
  int iterations = 0;
  int starts_tried = 0;
  std::vector<std::string> warnings;

  explicit FitResult(const ModelSpec& s) : spec(s), theta_hat(s) {}
  Eigen::Index n_params() const noexcept { return spec.n_params(); }
};

/// Starting point used when no init is supplied: alpha intercept -0.5 when the
/// last Kaplan-Meier estimate exceeds 0.05 (plateau), +0.5 otherwise; beta
/// intercept log(1 / mean t); log lambda 0.
ParamVector default_init(const SurvivalDataset& data, const ModelSpec& spec);

FitResult fit_mle(const SurvivalDataset& data, const ModelSpec& spec,
                  const std::optional<ParamVector>& init = std::nullopt,
                  const MleOptions& options = {});

/// theta_s +/- z * SE_s on the natural scale. Throws when the fit has no
/// covariance.
std::vector<Interval> wald_ci(const FitResult& fit, double level);

struct LrTestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<std::string> warnings;
};

/// -2 (l_restricted - l_full) against a chi-square law.
LrTestResult lr_test(const FitResult& restricted, const FitResult& full);

/// Distinct (x1, x2) rows with their cure fractions, at most `max_patterns`.
std::vector<PatternCure> pattern_cures(const ParamVector& theta, const DesignMatrices& x,
                                       Eigen::Index max_patterns = 64);

}  // namespace curesurv
