#include "curesurv/diagnostics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

#include "curesurv/bayes.hpp"

namespace curesurv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double generalized_cook_distance(const Eigen::VectorXd& delta, const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != delta.size() || covariance.cols() != delta.size())
    throw std::invalid_argument("generalized_cook_distance: dimension mismatch");
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance);
  if (ldlt.info() != Eigen::Success) throw std::invalid_argument("generalized_cook_distance: singular covariance");
  return std::max(0.0, delta.dot(ldlt.solve(delta)));
}

std::vector<Eigen::Index> flag_influential(const Eigen::VectorXd& gd, const Eigen::VectorXd& ld,
                                           Eigen::Index dim, const InfluenceOptions& options,
                                           double* gd_threshold, double* ld_threshold) {
  double gd_sum = 0.0;
  Eigen::Index gd_count = 0;
  std::vector<double> ld_sorted;
  for (Eigen::Index i = 0; i < gd.size(); ++i) {
    if (std::isfinite(gd[i])) {
      gd_sum += gd[i];
      ++gd_count;
    }
    if (std::isfinite(ld[i])) ld_sorted.push_back(ld[i]);
  }
  std::sort(ld_sorted.begin(), ld_sorted.end());
  const double gd_thr = gd_count > 0 ? options.gd_factor * (gd_sum / static_cast<double>(gd_count)) * static_cast<double>(dim)
                                     : std::numeric_limits<double>::infinity();
  const double ld_thr = ld_sorted.empty() ? std::numeric_limits<double>::infinity()
                                          : percentile_sorted(ld_sorted, options.ld_percentile);
  if (gd_threshold) *gd_threshold = gd_thr;
  if (ld_threshold) *ld_threshold = ld_thr;

  std::vector<Eigen::Index> flagged;
  for (Eigen::Index i = 0; i < gd.size(); ++i)
    if ((std::isfinite(gd[i]) && gd[i] > gd_thr) || (std::isfinite(ld[i]) && ld[i] > ld_thr)) flagged.push_back(i);
  return flagged;
}

InfluenceReport case_deletion_influence(const FitResult& fit, const SurvivalDataset& data,
                                        const InfluenceOptions& options) {
  if (!fit.converged || !fit.covariance_internal)
    throw std::invalid_argument("case_deletion_influence: need a converged fit with covariance");
  if (fit.n_obs != data.size()) throw std::invalid_argument("case_deletion_influence: fit is from different data");

  const Eigen::Index n = data.size();
  const ModelSpec spec = fit.spec;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(*fit.covariance_internal);
  const Eigen::VectorXd theta = fit.theta_hat.internal();

  MleOptions opts;
  opts.restarts = options.restart_budget;
  opts.compute_covariance = false;
  opts.initial_inverse_hessian = *fit.covariance_internal;

  InfluenceReport rep;
  rep.gd = Eigen::VectorXd::Constant(n, kNaN);
  rep.ld = Eigen::VectorXd::Constant(n, kNaN);
  std::vector<char> failed(static_cast<std::size_t>(n), 0);

  // Refits are independent; results land in slot i, so order is fixed.
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      const FitResult f = fit_mle(data.without_row(i), spec, fit.theta_hat, opts);
      if (!f.converged) {
        failed[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      const Eigen::VectorXd d = theta - f.theta_hat.internal();
      rep.gd[i] = std::max(0.0, d.dot(ldlt.solve(d)));
      const double l_i = loglik(f.theta_hat, data);
      rep.ld[i] = std::isfinite(l_i) ? std::max(0.0, 2.0 * (fit.loglik_max - l_i)) : kNaN;
    } catch (const std::exception&) {
      failed[static_cast<std::size_t>(i)] = 1;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (failed[static_cast<std::size_t>(i)]) rep.failed.push_back(i);

  rep.flagged = flag_influential(rep.gd, rep.ld, spec.n_params(), options, &rep.gd_threshold, &rep.ld_threshold);
  // failed refits are reported as flagged with missing measures
  for (Eigen::Index i : rep.failed) rep.flagged.push_back(i);
  std::sort(rep.flagged.begin(), rep.flagged.end());
  rep.flagged.erase(std::unique(rep.flagged.begin(), rep.flagged.end()), rep.flagged.end());
  return rep;
}

RelativeChange relative_change(const FitResult& full, const FitResult& dropped) {
  if (full.spec.model != dropped.spec.model || full.n_params() != dropped.n_params())
    throw std::invalid_argument("relative_change: fits use different models");
  const Eigen::VectorXd a = full.theta_hat.natural();
  const Eigen::VectorXd b = dropped.theta_hat.natural();
  const Eigen::Index k = a.size();
  RelativeChange rc;
  rc.rc_theta = Eigen::VectorXd::Constant(k, kNaN);
  rc.rc_se = Eigen::VectorXd::Constant(k, kNaN);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (a[j] != 0.0) rc.rc_theta[j] = std::fabs((a[j] - b[j]) / a[j]) * 100.0;
    else rc.undefined.push_back(j);
    const double se_a = full.std_errors.size() == k ? full.std_errors[j] : kNaN;
    const double se_b = dropped.std_errors.size() == k ? dropped.std_errors[j] : kNaN;
    if (std::isfinite(se_a) && std::isfinite(se_b) && se_a != 0.0)
      rc.rc_se[j] = std::fabs((se_a - se_b) / se_a) * 100.0;
  }
  return rc;
}

double martingale_residual(int delta, double log_surv) noexcept { return delta + log_surv; }

double deviance_residual(int delta, double martingale) noexcept {
  if (delta == 0) return sign_of(martingale) * std::sqrt(std::max(0.0, -2.0 * martingale));
  // log(delta - r_M) = log 0 at r_M = 1; the convention is sqrt(2) * sign.
  if (martingale >= 1.0) return std::sqrt(2.0);
  const double inner = -2.0 * (martingale + std::log1p(-martingale));
  return sign_of(martingale) * std::sqrt(std::max(0.0, inner));
}

ResidualReport residuals(const ParamVector& theta, const SurvivalDataset& data) {
  const Eigen::Index n = data.size();
  const RegressionCoefficients coef = theta.coefficients();
  const LinearPredictors lp = linear_predictors(coef, data.x);
  const Model model = theta.spec().model;
  ResidualReport r;
  r.martingale.resize(n);
  r.deviance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // delta = 0 contribution is exactly log S(t_i)
    const double log_s = detail::observation_contribution(model, data.t[i], 0, lp.alpha[i], lp.beta[i],
                                                          theta.lambda(), theta.log_lambda());
    const int d = data.delta[static_cast<std::size_t>(i)];
    r.martingale[i] = martingale_residual(d, log_s);
    r.deviance[i] = deviance_residual(d, r.martingale[i]);
  }
  return r;
}

ResidualReport residuals(const FitResult& fit, const SurvivalDataset& data) {
  return residuals(fit.theta_hat, data);
}

}  // namespace curesurv
