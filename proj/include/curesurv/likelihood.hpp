#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curesurv/regression.hpp"

namespace curesurv {

/// Right-censored sample (t_i, delta_i, X_i).
struct SurvivalDataset {
  Eigen::VectorXd t;
  std::vector<int> delta;  // 1 = event observed, 0 = censored
  DesignMatrices x;

  Eigen::Index size() const noexcept { return t.size(); }
  void validate() const;
  double censoring_fraction() const;
  SurvivalDataset select_rows(const std::vector<Eigen::Index>& rows) const;
  SurvivalDataset without_row(Eigen::Index row) const;
  SurvivalDataset without_rows(std::vector<Eigen::Index> rows) const;
};

/// Model family plus the coefficient counts of both linear predictors.
struct ModelSpec {
  Model model = Model::MOGompertz;
  Eigen::Index alpha_dim = 1;
  Eigen::Index beta_dim = 1;

  static ModelSpec for_design(Model model, const DesignMatrices& x);
  bool has_lambda() const noexcept { return is_marshall_olkin(model); }
  Eigen::Index n_params() const noexcept { return alpha_dim + beta_dim + (has_lambda() ? 1 : 0); }
  /// a0.., b0.., lambda
  std::vector<std::string> param_names() const;
  /// Spec with the same design but the nested base family.
  ModelSpec base() const { return {base_model(model), alpha_dim, beta_dim}; }
};

/// Packed (a, b, log lambda). Lambda lives on the log scale internally and is
/// reported on the natural scale.
class ParamVector {
 public:
  explicit ParamVector(const ModelSpec& spec);

  static ParamVector from_internal(const ModelSpec& spec, Eigen::VectorXd internal);
  static ParamVector from_natural(const ModelSpec& spec, const Eigen::VectorXd& natural);
  static ParamVector from_coefficients(const ModelSpec& spec, const RegressionCoefficients& coef);

  const ModelSpec& spec() const noexcept { return spec_; }
  Eigen::Index size() const noexcept { return values_.size(); }

  const Eigen::VectorXd& internal() const noexcept { return values_; }
  Eigen::VectorXd natural() const;
  RegressionCoefficients coefficients() const;

  Eigen::VectorXd a() const { return values_.head(spec_.alpha_dim); }
  Eigen::VectorXd b() const { return values_.segment(spec_.alpha_dim, spec_.beta_dim); }
  bool has_lambda() const noexcept { return spec_.has_lambda(); }
  double log_lambda() const;
  double lambda() const;

 private:
  ModelSpec spec_;
  Eigen::VectorXd values_;
};

/// Thrown by the numerical derivatives when a neighbouring evaluation is not
/// finite.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, Eigen::Index coordinate)
      : std::runtime_error(what), coordinate_(coordinate) {}
  Eigen::Index coordinate() const noexcept { return coordinate_; }

 private:
  Eigen::Index coordinate_;
};

/// Per-observation delta*log f + (1-delta)*log S. Computed in parallel; every
/// entry is produced by the same scalar code regardless of thread count.
Eigen::VectorXd log_contributions(const ParamVector& theta, const SurvivalDataset& data);

/// Censored log-likelihood. Returns -inf when any term is not finite.
/// OpenMP kernel with a fixed-order pairwise reduction.
double loglik(const ParamVector& theta, const SurvivalDataset& data);

/// Serial reference: plain left-to-right loop, no parallelism.
double loglik_serial(const ParamVector& theta, const SurvivalDataset& data);

/// Central-difference gradient with respect to the internal parameters.
Eigen::VectorXd grad_loglik(const ParamVector& theta, const SurvivalDataset& data);

/// Central second-difference Hessian (internal parameters), symmetrized.
Eigen::MatrixXd hessian_loglik(const ParamVector& theta, const SurvivalDataset& data);

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Step h_j = eps^(1/3) * max(1, |x_j|). Throws NonFiniteError.
Eigen::VectorXd numeric_gradient(const ScalarFunction& f, const Eigen::VectorXd& x);

/// Four-point stencil with step eps^(1/4) * max(1, |x_j|), returned as
/// (H + H')/2. Throws NonFiniteError.
Eigen::MatrixXd numeric_hessian(const ScalarFunction& f, const Eigen::VectorXd& x);

namespace detail {

// Contribution of one observation given its linear predictors.
double observation_contribution(Model model, double t, int delta, double alpha, double beta,
                                double lambda, double log_lambda) noexcept;

}  // namespace detail

}  // namespace curesurv
