#include "curesurv/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace curesurv {

Family base_family(Model model) noexcept {
  return model == Model::Gompertz || model == Model::MOGompertz ? Family::Gompertz
                                                                 : Family::InverseGaussian;
}

bool is_marshall_olkin(Model model) noexcept {
  return model == Model::MOGompertz || model == Model::MOInverseGaussian;
}

Model base_model(Model model) noexcept {
  return base_family(model) == Family::Gompertz ? Model::Gompertz : Model::InverseGaussian;
}

std::string model_name(Model model) {
  switch (model) {
    case Model::Gompertz: return "gompertz";
    case Model::InverseGaussian: return "ig";
    case Model::MOGompertz: return "mo-gompertz";
    case Model::MOInverseGaussian: return "mo-ig";
  }
  return "?";
}

Model parse_model(std::string_view name) {
  if (name == "gompertz") return Model::Gompertz;
  if (name == "ig" || name == "inverse-gaussian") return Model::InverseGaussian;
  if (name == "mo-gompertz") return Model::MOGompertz;
  if (name == "mo-ig" || name == "mo-inverse-gaussian") return Model::MOInverseGaussian;
  throw std::invalid_argument("unknown family '" + std::string(name) +
                              "' (expected gompertz, ig, mo-gompertz or mo-ig)");
}

DesignMatrices DesignMatrices::from_covariates(const Eigen::MatrixXd& alpha_covariates,
                                               const Eigen::MatrixXd& beta_covariates,
                                               std::vector<std::string> alpha_names,
                                               std::vector<std::string> beta_names) {
  if (alpha_covariates.rows() != beta_covariates.rows())
    throw std::invalid_argument("covariate blocks have different row counts");
  const Eigen::Index n = alpha_covariates.rows();
  DesignMatrices d;
  d.x1.resize(n, alpha_covariates.cols() + 1);
  d.x1.col(0).setOnes();
  d.x1.rightCols(alpha_covariates.cols()) = alpha_covariates;
  d.x2.resize(n, beta_covariates.cols() + 1);
  d.x2.col(0).setOnes();
  d.x2.rightCols(beta_covariates.cols()) = beta_covariates;

  if (alpha_names.empty())
    for (Eigen::Index j = 0; j < alpha_covariates.cols(); ++j) alpha_names.push_back("x1_" + std::to_string(j + 1));
  if (beta_names.empty())
    for (Eigen::Index j = 0; j < beta_covariates.cols(); ++j) beta_names.push_back("x2_" + std::to_string(j + 1));
  d.x1_names = std::move(alpha_names);
  d.x2_names = std::move(beta_names);
  d.validate();
  return d;
}

DesignMatrices DesignMatrices::intercept_only(Eigen::Index n) {
  return from_covariates(Eigen::MatrixXd(n, 0), Eigen::MatrixXd(n, 0));
}

void DesignMatrices::validate() const {
  if (x1.rows() != x2.rows()) throw std::invalid_argument("design: x1 and x2 row counts differ");
  if (x1.cols() < 1 || x2.cols() < 1) throw std::invalid_argument("design: missing intercept column");
  if (!(x1.col(0).array() == 1.0).all() || !(x2.col(0).array() == 1.0).all())
    throw std::invalid_argument("design: intercept columns must be exactly 1");
  if (!x1.allFinite() || !x2.allFinite()) throw std::invalid_argument("design: non-finite entry");
  if (static_cast<Eigen::Index>(x1_names.size()) != x1.cols() - 1 ||
      static_cast<Eigen::Index>(x2_names.size()) != x2.cols() - 1)
    throw std::invalid_argument("design: covariate names do not match the columns");
}

DesignMatrices DesignMatrices::select_rows(const std::vector<Eigen::Index>& rows) const {
  DesignMatrices d;
  d.x1 = x1(rows, Eigen::all);
  d.x2 = x2(rows, Eigen::all);
  d.x1_names = x1_names;
  d.x2_names = x2_names;
  return d;
}

LinearPredictors linear_predictors(const RegressionCoefficients& coef, const DesignMatrices& x) {
  if (coef.a.size() != x.x1.cols() || coef.b.size() != x.x2.cols())
    throw std::invalid_argument("linear_predictors: coefficient length does not match the design");
  LinearPredictors lp;
  const Eigen::Index n = x.rows();
  lp.alpha.resize(n);
  lp.beta.resize(n);
  // Row-wise dots (not GEMV) so row_law reproduces these bit for bit.
  for (Eigen::Index i = 0; i < n; ++i) {
    lp.alpha[i] = x.x1.row(i).dot(coef.a);
    lp.beta[i] = std::exp(x.x2.row(i).dot(coef.b));
    if (std::fabs(lp.alpha[i]) < kAlphaClamp) {
      lp.alpha[i] = detail::clamp_alpha(lp.alpha[i]);
      lp.clamped_rows.push_back(i);
    }
  }
  return lp;
}

MOLaw row_law(const RegressionCoefficients& coef, const DesignMatrices& x, Eigen::Index row,
              Model model) {
  if (coef.lambda.has_value() != is_marshall_olkin(model))
    throw std::invalid_argument("row_law: lambda must be present exactly for MO models");
  const double alpha = detail::clamp_alpha(x.x1.row(row).dot(coef.a));
  const double beta = std::exp(x.x2.row(row).dot(coef.b));
  return MOLaw{BaseLaw{base_family(model), alpha, beta}, coef.lambda.value_or(1.0)};
}

std::vector<CureFraction> per_observation_cure(const RegressionCoefficients& coef,
                                               const DesignMatrices& x, Model model) {
  if (coef.lambda.has_value() != is_marshall_olkin(model))
    throw std::invalid_argument("per_observation_cure: lambda must be present exactly for MO models");
  const LinearPredictors lp = linear_predictors(coef, x);
  const double lambda = coef.lambda.value_or(1.0);
  std::vector<CureFraction> out;
  out.reserve(lp.alpha.size());
  for (Eigen::Index i = 0; i < lp.alpha.size(); ++i)
    out.push_back(cure_fraction(MOLaw{BaseLaw{base_family(model), lp.alpha[i], lp.beta[i]}, lambda}));
  return out;
}

}  // namespace curesurv
