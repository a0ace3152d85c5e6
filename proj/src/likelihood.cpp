#include "curesurv/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curesurv/special.hpp"

namespace curesurv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

// ---- dataset -------------------------------------------------------------

void SurvivalDataset::validate() const {
  const Eigen::Index n = t.size();
  if (static_cast<Eigen::Index>(delta.size()) != n || x.rows() != n)
    throw std::invalid_argument("dataset: t, delta and the design have different lengths");
  x.validate();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i]))
      throw std::invalid_argument("dataset: row " + std::to_string(i) + " has a non-positive time");
    if (delta[i] != 0 && delta[i] != 1)
      throw std::invalid_argument("dataset: row " + std::to_string(i) + " has event value " +
                                  std::to_string(delta[i]));
  }
}

double SurvivalDataset::censoring_fraction() const {
  if (delta.empty()) return 0.0;
  const auto censored = std::count(delta.begin(), delta.end(), 0);
  return static_cast<double>(censored) / static_cast<double>(delta.size());
}

SurvivalDataset SurvivalDataset::select_rows(const std::vector<Eigen::Index>& rows) const {
  SurvivalDataset out;
  out.t = t(rows);
  out.delta.reserve(rows.size());
  for (Eigen::Index r : rows) out.delta.push_back(delta[static_cast<std::size_t>(r)]);
  out.x = x.select_rows(rows);
  return out;
}

SurvivalDataset SurvivalDataset::without_row(Eigen::Index row) const {
  return without_rows({row});
}

SurvivalDataset SurvivalDataset::without_rows(std::vector<Eigen::Index> rows) const {
  std::sort(rows.begin(), rows.end());
  if (!rows.empty() && (rows.front() < 0 || rows.back() >= size()))
    throw std::out_of_range("without_rows: row index out of range");
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(size()));
  auto it = rows.begin();
  for (Eigen::Index i = 0; i < size(); ++i) {
    while (it != rows.end() && *it < i) ++it;
    if (it != rows.end() && *it == i) continue;
    keep.push_back(i);
  }
  return select_rows(keep);
}

// ---- spec / parameters ---------------------------------------------------

ModelSpec ModelSpec::for_design(Model model, const DesignMatrices& x) {
  return {model, x.x1.cols(), x.x2.cols()};
}

std::vector<std::string> ModelSpec::param_names() const {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < alpha_dim; ++j) names.push_back("a" + std::to_string(j));
  for (Eigen::Index j = 0; j < beta_dim; ++j) names.push_back("b" + std::to_string(j));
  if (has_lambda()) names.emplace_back("lambda");
  return names;
}

ParamVector::ParamVector(const ModelSpec& spec)
    : spec_(spec), values_(Eigen::VectorXd::Zero(spec.n_params())) {
  if (spec.alpha_dim < 1 || spec.beta_dim < 1)
    throw std::invalid_argument("ModelSpec: both predictors need at least an intercept");
}

ParamVector ParamVector::from_internal(const ModelSpec& spec, Eigen::VectorXd internal) {
  ParamVector p(spec);
  if (internal.size() != spec.n_params())
    throw std::invalid_argument("ParamVector: expected " + std::to_string(spec.n_params()) +
                                " values, got " + std::to_string(internal.size()));
  p.values_ = std::move(internal);
  return p;
}

ParamVector ParamVector::from_natural(const ModelSpec& spec, const Eigen::VectorXd& natural) {
  Eigen::VectorXd v = natural;
  if (v.size() != spec.n_params())
    throw std::invalid_argument("ParamVector: expected " + std::to_string(spec.n_params()) +
                                " values, got " + std::to_string(v.size()));
  if (spec.has_lambda()) {
    const double lambda = v[v.size() - 1];
    if (!(lambda > 0.0)) throw std::invalid_argument("ParamVector: lambda must be positive");
    v[v.size() - 1] = std::log(lambda);
  }
  return from_internal(spec, std::move(v));
}

ParamVector ParamVector::from_coefficients(const ModelSpec& spec,
                                           const RegressionCoefficients& coef) {
  if (coef.a.size() != spec.alpha_dim || coef.b.size() != spec.beta_dim ||
      coef.lambda.has_value() != spec.has_lambda())
    throw std::invalid_argument("ParamVector: coefficients do not match the spec");
  Eigen::VectorXd v(spec.n_params());
  v.head(spec.alpha_dim) = coef.a;
  v.segment(spec.alpha_dim, spec.beta_dim) = coef.b;
  if (spec.has_lambda()) v[v.size() - 1] = *coef.lambda;
  return from_natural(spec, v);
}

Eigen::VectorXd ParamVector::natural() const {
  Eigen::VectorXd v = values_;
  if (has_lambda()) v[v.size() - 1] = std::exp(v[v.size() - 1]);
  return v;
}

RegressionCoefficients ParamVector::coefficients() const {
  RegressionCoefficients c{a(), b(), std::nullopt};
  if (has_lambda()) c.lambda = lambda();
  return c;
}

double ParamVector::log_lambda() const { return has_lambda() ? values_[values_.size() - 1] : 0.0; }

double ParamVector::lambda() const { return has_lambda() ? std::exp(log_lambda()) : 1.0; }

// ---- likelihood ----------------------------------------------------------

namespace detail {

double observation_contribution(Model model, double t, int delta, double alpha, double beta,
                                double lambda, double log_lambda) noexcept {
  const bool gompertz = base_family(model) == Family::Gompertz;
  const double log_s = gompertz ? gompertz_logsurv(t, alpha, beta) : invgauss_logsurv(t, alpha, beta);
  const double log_den = is_marshall_olkin(model) ? mo_log_denominator(log_s, lambda, log_lambda) : 0.0;
  if (delta == 0) return log_lambda + log_s - log_den;
  const double log_f =
      gompertz ? gompertz_logpdf_from_logsurv(t, alpha, beta, log_s) : invgauss_logpdf(t, alpha, beta);
  return log_lambda + log_f - 2.0 * log_den;
}

}  // namespace detail

namespace {

struct RowEvaluator {
  const ParamVector& theta;
  const SurvivalDataset& data;
  Eigen::VectorXd a, b;
  double lambda, log_lambda;

  RowEvaluator(const ParamVector& th, const SurvivalDataset& d)
      : theta(th), data(d), a(th.a()), b(th.b()), lambda(th.lambda()), log_lambda(th.log_lambda()) {
    if (a.size() != d.x.x1.cols() || b.size() != d.x.x2.cols())
      throw std::invalid_argument("loglik: parameter layout does not match the design");
    if (!th.has_lambda()) lambda = 1.0, log_lambda = 0.0;
  }

  double operator()(Eigen::Index i) const noexcept {
    const double alpha = detail::clamp_alpha(data.x.x1.row(i).dot(a));
    const double beta = std::exp(data.x.x2.row(i).dot(b));
    return detail::observation_contribution(theta.spec().model, data.t[i], data.delta[static_cast<std::size_t>(i)],
                                            alpha, beta, lambda, log_lambda);
  }
};

}  // namespace

Eigen::VectorXd log_contributions(const ParamVector& theta, const SurvivalDataset& data) {
  const RowEvaluator eval(theta, data);
  const Eigen::Index n = data.size();
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = eval(i);
  return out;
}

double loglik(const ParamVector& theta, const SurvivalDataset& data) {
  const Eigen::VectorXd c = log_contributions(theta, data);
  if (!c.allFinite()) return kNegInf;
  return pairwise_sum(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
}

double loglik_serial(const ParamVector& theta, const SurvivalDataset& data) {
  const RowEvaluator eval(theta, data);
  double s = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double c = eval(i);
    if (!std::isfinite(c)) return kNegInf;
    s += c;
  }
  return s;
}

// ---- numerical derivatives ------------------------------------------------

Eigen::VectorXd numeric_gradient(const ScalarFunction& f, const Eigen::VectorXd& x) {
  const double base_step = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = base_step * std::max(1.0, std::fabs(x[j]));
    const double up = x[j] + h, down = x[j] - h;
    xp[j] = up;
    const double fp = f(xp);
    xp[j] = down;
    const double fm = f(xp);
    xp[j] = x[j];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteError("numeric_gradient: non-finite value next to coordinate " + std::to_string(j), j);
    g[j] = (fp - fm) / (up - down);
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const ScalarFunction& f, const Eigen::VectorXd& x) {
  const double base_step = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  const Eigen::Index d = x.size();
  Eigen::VectorXd h(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double hj = base_step * std::max(1.0, std::fabs(x[j]));
    h[j] = (x[j] + hj) - x[j];  // representable step
  }
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd y = x;
  auto eval = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    y = x;
    y[i] += si * h[i];
    y[j] += sj * h[j];
    const double v = f(y);
    if (!std::isfinite(v))
      throw NonFiniteError("numeric_hessian: non-finite value next to coordinate " + std::to_string(i), i);
    return v;
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double v = eval(i, 1, j, 1) - eval(i, 1, j, -1) - eval(i, -1, j, 1) + eval(i, -1, j, -1);
      H(i, j) = v / (4.0 * h[i] * h[j]);
      H(j, i) = H(i, j);
    }
  }
  return 0.5 * (H + H.transpose());
}

namespace {

ScalarFunction internal_objective(const ParamVector& theta, const SurvivalDataset& data) {
  const ModelSpec spec = theta.spec();
  return [spec, &data](const Eigen::VectorXd& v) {
    return loglik(ParamVector::from_internal(spec, v), data);
  };
}

void require_finite_center(const ParamVector& theta, const SurvivalDataset& data) {
  if (!std::isfinite(loglik(theta, data)))
    throw NonFiniteError("log-likelihood is not finite at the evaluation point", -1);
}

}  // namespace

Eigen::VectorXd grad_loglik(const ParamVector& theta, const SurvivalDataset& data) {
  require_finite_center(theta, data);
  return numeric_gradient(internal_objective(theta, data), theta.internal());
}

Eigen::MatrixXd hessian_loglik(const ParamVector& theta, const SurvivalDataset& data) {
  require_finite_center(theta, data);
  return numeric_hessian(internal_objective(theta, data), theta.internal());
}

}  // namespace curesurv
