#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "curesurv/distributions.hpp"

namespace curesurv {

enum class Model { Gompertz, InverseGaussian, MOGompertz, MOInverseGaussian };

Family base_family(Model model) noexcept;
bool is_marshall_olkin(Model model) noexcept;
/// The base (non-MO) model nested in `model`.
Model base_model(Model model) noexcept;
/// CLI spelling: gompertz, ig, mo-gompertz, mo-ig.
std::string model_name(Model model);
Model parse_model(std::string_view name);

/// Covariate rows for alpha (x1) and beta (x2). Both carry a leading
/// intercept column of ones.
struct DesignMatrices {
  Eigen::MatrixXd x1;
  Eigen::MatrixXd x2;
  std::vector<std::string> x1_names;  // excludes the intercept
  std::vector<std::string> x2_names;

  /// Prepends the intercept columns.
  static DesignMatrices from_covariates(const Eigen::MatrixXd& alpha_covariates,
                                        const Eigen::MatrixXd& beta_covariates,
                                        std::vector<std::string> alpha_names = {},
                                        std::vector<std::string> beta_names = {});
  /// Intercept-only design with n rows.
  static DesignMatrices intercept_only(Eigen::Index n);

  Eigen::Index rows() const noexcept { return x1.rows(); }
  void validate() const;
  DesignMatrices select_rows(const std::vector<Eigen::Index>& rows) const;
};

struct RegressionCoefficients {
  Eigen::VectorXd a;  // identity link for alpha
  Eigen::VectorXd b;  // log link for beta
  std::optional<double> lambda;  // present iff the model is Marshall-Olkin
};

struct LinearPredictors {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  std::vector<Eigen::Index> clamped_rows;  // rows where |alpha| < kAlphaClamp
};

/// alpha_i = x1_i' a, beta_i = exp(x2_i' b).
LinearPredictors linear_predictors(const RegressionCoefficients& coef, const DesignMatrices& x);

/// Cure fraction per row; p = p0 = 0 where alpha_i > 0.
std::vector<CureFraction> per_observation_cure(const RegressionCoefficients& coef,
                                               const DesignMatrices& x, Model model);

/// Law for a single row.
MOLaw row_law(const RegressionCoefficients& coef, const DesignMatrices& x, Eigen::Index row,
              Model model);

}  // namespace curesurv
