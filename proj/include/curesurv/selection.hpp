#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "curesurv/bayes.hpp"
#include "curesurv/mle.hpp"

namespace curesurv {

struct InfoCriteria {
  double aicc = 0.0;
  double bic = 0.0;
  double hqic = 0.0;
  double caic = 0.0;
};

/// AICc, BIC, HQIC and CAIC. Requires n > k + 1.
InfoCriteria info_criteria(double loglik_max, std::size_t k, std::size_t n);

/// S x n matrix of per-draw, per-observation log likelihood contributions
/// log(f^delta S^(1-delta)).
Eigen::MatrixXd contribution_matrix(const PosteriorSample& sample, const SurvivalDataset& data,
                                    const ModelSpec& spec);

struct CpoResult {
  Eigen::VectorXd log_cpo;
  double lpml = 0.0;
  std::vector<Eigen::Index> flagged;  // observations with zero/overflowed CPO
};

struct DicResult {
  double dic = 0.0;
  double mean_deviance = 0.0;
  double var_deviance = 0.0;
  Eigen::Index excluded = 0;  // non-finite deviance draws
};

struct WaicResult {
  double waic = 0.0;  // lpd - pd; larger is better
  double lpd = 0.0;
  double pd = 0.0;
  Eigen::Index excluded = 0;
  double minus2() const noexcept { return -2.0 * waic; }
};

// Kernels over a contribution matrix (rows = draws). No minimum draw count.
CpoResult cpo_lpml(const Eigen::MatrixXd& log_contrib);
DicResult dic(const Eigen::MatrixXd& log_contrib);
DicResult dic_from_deviance(std::span<const double> deviance);
WaicResult waic(const Eigen::MatrixXd& log_contrib);

// Posterior-sample versions; require at least kMinSummaryDraws draws.
CpoResult cpo_lpml(const PosteriorSample& sample, const SurvivalDataset& data,
                   const ModelSpec& spec);
DicResult dic(const PosteriorSample& sample, const SurvivalDataset& data, const ModelSpec& spec);
WaicResult waic(const PosteriorSample& sample, const SurvivalDataset& data,
                const ModelSpec& spec);

struct CriteriaReport {
  std::optional<double> aicc, bic, hqic, caic;
  std::optional<double> lpml, dic, waic;

  std::optional<double> minus2_lpml() const;
  std::optional<double> minus2_waic() const;
};

/// Frequentist entries iff `fit` is given; Bayesian entries iff `sample` is.
CriteriaReport criteria_report(const FitResult* fit, const PosteriorSample* sample,
                               const SurvivalDataset& data, const ModelSpec& spec);

}  // namespace curesurv
