#pragma once

#include <Eigen/Dense>

#include <vector>

#include "curesurv/mle.hpp"

namespace curesurv {

struct InfluenceOptions {
  /// Flag GD_i > gd_factor * mean(GD) * dim(theta).
  double gd_factor = 2.0;
  /// Flag LD_i above this percentile of the LD vector.
  double ld_percentile = 0.99;
  int restart_budget = 2;
};

struct InfluenceReport {
  Eigen::VectorXd gd;  // NaN for cases whose refit failed
  Eigen::VectorXd ld;
  std::vector<Eigen::Index> flagged;  // 0-based, sorted
  std::vector<Eigen::Index> failed;
  double gd_threshold = 0.0;
  double ld_threshold = 0.0;
};

/// (d' Sigma^-1 d).
double generalized_cook_distance(const Eigen::VectorXd& delta, const Eigen::MatrixXd& covariance);

/// Refits with each case deleted (seeded at theta_hat) and measures the
/// shift: GD on the internal scale, LD = 2 (l(theta_hat) - l(theta_(i))) on
/// the full data. Requires a converged fit with covariance.
InfluenceReport case_deletion_influence(const FitResult& fit, const SurvivalDataset& data,
                                        const InfluenceOptions& options = {});

/// Union of the GD and LD threshold rules.
std::vector<Eigen::Index> flag_influential(const Eigen::VectorXd& gd, const Eigen::VectorXd& ld,
                                           Eigen::Index dim, const InfluenceOptions& options,
                                           double* gd_threshold = nullptr,
                                           double* ld_threshold = nullptr);

struct RelativeChange {
  Eigen::VectorXd rc_theta;  // percent; NaN where theta_hat == 0
  Eigen::VectorXd rc_se;     // percent; NaN where SE == 0 or unavailable
  std::vector<Eigen::Index> undefined;
};

/// |(full - dropped) / full| * 100 for estimates and standard errors.
RelativeChange relative_change(const FitResult& full, const FitResult& dropped);

struct ResidualReport {
  Eigen::VectorXd martingale;
  Eigen::VectorXd deviance;
};

/// r_M = delta + log S(t); r_D = sign(r_M) sqrt(-2 [r_M + delta log(delta - r_M)]).
double martingale_residual(int delta, double log_surv) noexcept;
double deviance_residual(int delta, double martingale) noexcept;

ResidualReport residuals(const ParamVector& theta, const SurvivalDataset& data);
ResidualReport residuals(const FitResult& fit, const SurvivalDataset& data);

}  // namespace curesurv
