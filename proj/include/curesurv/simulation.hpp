#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "curesurv/bayes.hpp"
#include "curesurv/mle.hpp"

namespace curesurv {

/// Monte Carlo design. Covariates per row: x1 = (1, Bernoulli(0.7),
/// Uniform(0,1)), x2 = (1, Bernoulli(0.5), Uniform(0,1)).
struct SimConfig {
  Model model = Model::MOGompertz;
  RegressionCoefficients truth;
  Eigen::Index n = 500;
  int replicates = 200;
  std::uint64_t seed = 12345;

  /// MO-Gompertz: a = (-1.2, 0.5, 0.2), b = (-1.1, 1.5, 0.9), lambda = 2.
  /// MO-IG: a = (-1.0, 0.5, 0.2), b = (-1.1, 1.8, 0.8), lambda = 0.5.
  /// Base families reuse the coefficients of their MO counterpart.
  static SimConfig reference_design(Model model, Eigen::Index n, int replicates,
                                    std::uint64_t seed);
  ModelSpec spec() const { return {model, 3, 3}; }
  Eigen::VectorXd truth_natural() const;
  void validate() const;
};

struct SimulatedSample {
  SurvivalDataset data;
  std::vector<int> susceptible;  // M_i
  Eigen::VectorXd event_time;    // t*_i, +inf for cured rows
  Eigen::VectorXd u;             // uniform fed to the quantile; NaN for cured rows
  Eigen::VectorXd cure;          // p_i
  int regenerations = 0;
};

/// One dataset from replicate stream `replicate`. Resamples (bounded) when no
/// row has a finite event time.
SimulatedSample generate_sample(const SimConfig& config, std::uint64_t replicate);
SurvivalDataset generate_dataset(const SimConfig& config, std::uint64_t replicate);

/// Natural-scale point estimate, SD and interval for one replicate.
struct ReplicateEstimate {
  Eigen::VectorXd estimate;
  Eigen::VectorXd sd;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

using Estimator = std::function<std::optional<ReplicateEstimate>(
    const SurvivalDataset& data, const ModelSpec& spec, std::uint64_t seed)>;

Estimator frequentist_estimator(double level = 0.95, MleOptions options = {});
Estimator bayesian_estimator(int n_iter = 2500, int burn_in = 500, double level = 0.95);

enum class Engine { Frequentist, Bayesian };

struct ParameterReport {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double mean_sd = 0.0;
  double bias_pct = 0.0;
  double coverage = 0.0;
  double mcse_bias_pct = 0.0;  // Monte Carlo standard error of bias_pct
};

struct MonteCarloReport {
  Model model = Model::MOGompertz;
  Eigen::Index n = 0;
  int replicates = 0;
  int failures = 0;
  std::vector<ParameterReport> params;
};

/// Replicates run in parallel; the reduction is by replicate index.
/// Throws when more than 20% of the replicates fail.
MonteCarloReport monte_carlo(const SimConfig& config, const Estimator& estimator);
MonteCarloReport monte_carlo(const SimConfig& config, Engine engine);

void write_monte_carlo_csv(std::ostream& out, const std::vector<MonteCarloReport>& reports);

}  // namespace curesurv
