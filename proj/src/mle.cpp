#include "curesurv/mle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "curesurv/km.hpp"
#include "curesurv/optim.hpp"
#include "curesurv/rng.hpp"
#include "curesurv/special.hpp"

namespace curesurv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_inputs(const SurvivalDataset& data, const ModelSpec& spec) {
  data.validate();
  if (data.x.x1.cols() != spec.alpha_dim || data.x.x2.cols() != spec.beta_dim)
    throw std::invalid_argument("fit_mle: spec dimensions do not match the design");
  if (data.size() < spec.n_params() + 1)
    throw std::invalid_argument("fit_mle: need at least " + std::to_string(spec.n_params() + 1) +
                                " observations");
}

BfgsResult run_from(const SurvivalDataset& data, const ModelSpec& spec, const Eigen::VectorXd& x0,
                    const MleOptions& options) {
  auto f = [&](const Eigen::VectorXd& v) { return loglik(ParamVector::from_internal(spec, v), data); };
  auto g = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    try {
      out = numeric_gradient(f, v);
      return true;
    } catch (const NonFiniteError&) {
      return false;
    }
  };
  return maximize_bfgs(f, g, x0,
                       BfgsOptions{options.max_iter, options.gtol, options.ftol, options.initial_inverse_hessian});
}

// better = converged beats not converged, then larger log-likelihood
bool better(const BfgsResult& a, const BfgsResult& b) {
  if (!std::isfinite(b.value)) return std::isfinite(a.value);
  if (!std::isfinite(a.value)) return false;
  if (a.converged != b.converged) return a.converged;
  return a.value > b.value;
}

void attach_covariance(FitResult& fit, const SurvivalDataset& data) {
  const Eigen::Index k = fit.n_params();
  Eigen::MatrixXd H;
  try {
    H = hessian_loglik(fit.theta_hat, data);
  } catch (const NonFiniteError& e) {
    fit.warnings.emplace_back(std::string("Hessian unavailable: ") + e.what());
    return;
  }
  const Eigen::MatrixXd info = -H;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  Eigen::VectorXd jac = Eigen::VectorXd::Ones(k);
  if (fit.spec.has_lambda()) jac[k - 1] = fit.theta_hat.lambda();

  if (ev.minCoeff() <= 1e-10 * scale) {
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < k; ++i)
      if (ev[i] > 1e-10 * scale) inv[i] = 1.0 / ev[i];
    const Eigen::MatrixXd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    fit.pseudo_covariance = jac.asDiagonal() * pinv * jac.asDiagonal();
    fit.warnings.emplace_back("observed information is singular or indefinite; covariance omitted, "
                              "pseudo-inverse reported");
    return;
  }
  Eigen::MatrixXd cov = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose());
  fit.covariance_internal = cov;
  fit.covariance = jac.asDiagonal() * cov * jac.asDiagonal();
  fit.std_errors = fit.covariance->diagonal().cwiseSqrt();
  fit.ci = wald_ci(fit, fit.level);
}

}  // namespace

ParamVector default_init(const SurvivalDataset& data, const ModelSpec& spec) {
  const KmCurve km = kaplan_meier(std::span<const double>(data.t.data(), static_cast<std::size_t>(data.size())),
                                  std::span<const int>(data.delta));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.n_params());
  v[0] = km.surv.back() > 0.05 ? -0.5 : 0.5;
  v[spec.alpha_dim] = std::log(1.0 / data.t.mean());
  return ParamVector::from_internal(spec, v);  // log lambda = 0
}

FitResult fit_mle(const SurvivalDataset& data, const ModelSpec& spec,
                  const std::optional<ParamVector>& init, const MleOptions& options) {
  check_inputs(data, spec);
  FitResult fit(spec);
  fit.n_obs = data.size();
  fit.level = options.level;
  fit.std_errors = Eigen::VectorXd::Constant(spec.n_params(), kNaN);

  std::vector<Eigen::VectorXd> starts;
  if (init) {
    if (init->spec().model != spec.model || init->size() != spec.n_params())
      throw std::invalid_argument("fit_mle: init does not match the spec");
    starts.push_back(init->internal());
  } else {
    starts.push_back(default_init(data, spec).internal());
    if (spec.has_lambda() && options.seed_mo_with_base) {
      MleOptions base_opts = options;
      base_opts.compute_covariance = false;
      const FitResult base = fit_mle(data, spec.base(), std::nullopt, base_opts);
      if (std::isfinite(base.loglik_max)) {
        Eigen::VectorXd v(spec.n_params());
        v.head(spec.n_params() - 1) = base.theta_hat.internal();
        v[spec.n_params() - 1] = 0.0;
        starts.push_back(v);
      }
    }
  }

  BfgsResult best;
  best.value = -std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& x0 : starts) {
    BfgsResult r = run_from(data, spec, x0, options);
    ++fit.starts_tried;
    fit.iterations += r.iterations;
    any_converged = any_converged || r.converged;
    if (better(r, best)) best = std::move(r);
  }

  if (!any_converged) {
    Rng rng = make_stream(options.seed, 0);
    const Eigen::VectorXd center = std::isfinite(best.value) ? best.x : starts.front();
    for (int k = 0; k < options.restarts && !any_converged; ++k) {
      Eigen::VectorXd x0 = center;
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] += options.jitter * (2.0 * uniform01(rng) - 1.0);
      BfgsResult r = run_from(data, spec, x0, options);
      ++fit.starts_tried;
      fit.iterations += r.iterations;
      any_converged = r.converged;
      if (better(r, best)) best = std::move(r);
    }
  }

  if (!std::isfinite(best.value)) {
    fit.warnings.emplace_back("no start reached a finite log-likelihood");
    return fit;
  }
  fit.theta_hat = ParamVector::from_internal(spec, best.x);
  fit.loglik_max = best.value;
  fit.converged = best.converged;
  fit.grad_norm = best.gradient.lpNorm<Eigen::Infinity>();
  if (!fit.converged) fit.warnings.emplace_back("optimizer did not converge: " + best.message);

  const auto clamped = linear_predictors(fit.theta_hat.coefficients(), data.x).clamped_rows;
  fit.clamped_rows = static_cast<Eigen::Index>(clamped.size());
  if (fit.clamped_rows > 0)
    fit.warnings.emplace_back(std::to_string(fit.clamped_rows) + " rows had alpha clamped away from 0");

  fit.cure_estimates = pattern_cures(fit.theta_hat, data.x);
  if (fit.converged && options.compute_covariance) attach_covariance(fit, data);
  if (fit.ci.empty()) fit.ci.assign(static_cast<std::size_t>(spec.n_params()), Interval{kNaN, kNaN});
  return fit;
}

std::vector<Interval> wald_ci(const FitResult& fit, double level) {
  if (!fit.covariance) throw std::invalid_argument("wald_ci: fit has no covariance");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("wald_ci: level must lie in (0, 1)");
  const double z = std_normal_quantile(0.5 + 0.5 * level);
  const Eigen::VectorXd est = fit.theta_hat.natural();
  std::vector<Interval> ci;
  for (Eigen::Index s = 0; s < est.size(); ++s) {
    const double se = std::sqrt(std::max(0.0, (*fit.covariance)(s, s)));
    ci.emplace_back(est[s] - z * se, est[s] + z * se);
  }
  return ci;
}

LrTestResult lr_test(const FitResult& restricted, const FitResult& full) {
  const ModelSpec& r = restricted.spec;
  const ModelSpec& f = full.spec;
  const bool same = r.model == f.model;
  const bool nested = same || (is_marshall_olkin(f.model) && r.model == base_model(f.model));
  if (!nested || r.alpha_dim != f.alpha_dim || r.beta_dim != f.beta_dim || restricted.n_obs != full.n_obs)
    throw std::invalid_argument("lr_test: models are not nested on the same data");
  if (!std::isfinite(restricted.loglik_max) || !std::isfinite(full.loglik_max))
    throw std::invalid_argument("lr_test: a fit has no finite log-likelihood");

  LrTestResult out;
  out.df = static_cast<int>(f.n_params() - r.n_params());
  const double stat = -2.0 * (restricted.loglik_max - full.loglik_max);
  if (stat < 0.0) {
    if (stat < -1e-8) out.warnings.emplace_back("negative LR statistic clamped to 0");
    out.statistic = 0.0;
  } else {
    out.statistic = stat;
  }
  out.p_value = out.df == 0 ? 1.0 : chi2_upper_tail(out.statistic, out.df);
  return out;
}

std::vector<PatternCure> pattern_cures(const ParamVector& theta, const DesignMatrices& x,
                                       Eigen::Index max_patterns) {
  const RegressionCoefficients coef = theta.coefficients();
  const Model model = theta.spec().model;
  std::vector<PatternCure> out;
  std::vector<Eigen::Index> first_row;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    bool found = false;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (x.x1.row(i) == x.x1.row(first_row[k]) && x.x2.row(i) == x.x2.row(first_row[k])) {
        ++out[k].count;
        found = true;
        break;
      }
    }
    if (found) continue;
    if (static_cast<Eigen::Index>(out.size()) >= max_patterns) continue;
    PatternCure pc;
    pc.x1 = x.x1.row(i).transpose();
    pc.x2 = x.x2.row(i).transpose();
    pc.count = 1;
    pc.cure = cure_fraction(row_law(coef, x, i, model));
    out.push_back(std::move(pc));
    first_row.push_back(i);
  }
  return out;
}

}  // namespace curesurv
