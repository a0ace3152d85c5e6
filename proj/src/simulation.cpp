#include "curesurv/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "curesurv/rng.hpp"

namespace curesurv {

namespace {

constexpr int kMaxRegenerations = 16;
constexpr int kMaxUniformRedraws = 64;
constexpr double kInf = std::numeric_limits<double>::infinity();

double positive_uniform(Rng& rng) {
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  return u;
}

std::uint64_t estimator_seed(std::uint64_t master, std::uint64_t replicate) {
  return splitmix64(master ^ splitmix64(replicate + 0x632be59bd9b4e019ULL));
}

}  // namespace

SimConfig SimConfig::reference_design(Model model, Eigen::Index n, int replicates, std::uint64_t seed) {
  SimConfig c;
  c.model = model;
  c.n = n;
  c.replicates = replicates;
  c.seed = seed;
  Eigen::VectorXd a(3), b(3);
  double lambda;
  if (base_family(model) == Family::Gompertz) {
    a << -1.2, 0.5, 0.2;
    b << -1.1, 1.5, 0.9;
    lambda = 2.0;
  } else {
    a << -1.0, 0.5, 0.2;
    b << -1.1, 1.8, 0.8;
    lambda = 0.5;
  }
  c.truth = RegressionCoefficients{a, b, std::nullopt};
  if (is_marshall_olkin(model)) c.truth.lambda = lambda;
  return c;
}

Eigen::VectorXd SimConfig::truth_natural() const {
  return ParamVector::from_coefficients(spec(), truth).natural();
}

void SimConfig::validate() const {
  if (replicates < 1) throw std::invalid_argument("SimConfig: replicates must be at least 1");
  if (n < 10) throw std::invalid_argument("SimConfig: n must be at least 10");
  if (truth.a.size() != 3 || truth.b.size() != 3)
    throw std::invalid_argument("SimConfig: the design has three coefficients per predictor");
  if (truth.lambda.has_value() != is_marshall_olkin(model))
    throw std::invalid_argument("SimConfig: lambda must be given exactly for MO models");
}

SimulatedSample generate_sample(const SimConfig& config, std::uint64_t replicate) {
  config.validate();
  const Eigen::Index n = config.n;
  const Model model = config.model;

  for (int attempt = 0; attempt <= kMaxRegenerations; ++attempt) {
    // sub-stream per (replicate, attempt)
    Rng rng = make_stream(config.seed, replicate * (kMaxRegenerations + 1) + static_cast<std::uint64_t>(attempt));
    Eigen::MatrixXd c1(n, 2), c2(n, 2);
    SimulatedSample s;
    s.susceptible.assign(static_cast<std::size_t>(n), 0);
    s.event_time = Eigen::VectorXd::Constant(n, kInf);
    s.u = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    s.cure.resize(n);
    s.regenerations = attempt;

    for (Eigen::Index i = 0; i < n; ++i) {
      c1(i, 0) = uniform01(rng) < 0.7 ? 1.0 : 0.0;
      c1(i, 1) = uniform01(rng);
      c2(i, 0) = uniform01(rng) < 0.5 ? 1.0 : 0.0;
      c2(i, 1) = uniform01(rng);
    }
    s.data.x = DesignMatrices::from_covariates(c1, c2, {"x11", "x12"}, {"x21", "x22"});

    double t_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const MOLaw law = row_law(config.truth, s.data.x, i, model);
      const double p = cure_fraction(law).p;
      if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("generate_sample: truth must give cure fractions in (0, 1) for every row");
      s.cure[i] = p;
      const bool susceptible = uniform01(rng) < 1.0 - p;
      s.susceptible[static_cast<std::size_t>(i)] = susceptible ? 1 : 0;
      if (!susceptible) continue;
      for (int k = 0;; ++k) {
        const double u = (1.0 - p) * positive_uniform(rng);
        try {
          s.event_time[i] = quantile(u, law);
          s.u[i] = u;
          break;
        } catch (const std::exception&) {
          // u numerically at the plateau; draw again
          if (k >= kMaxUniformRedraws) throw;
        }
      }
      t_max = std::max(t_max, s.event_time[i]);
    }
    if (!(t_max > 0.0)) continue;  // no finite event time: regenerate

    s.data.t.resize(n);
    s.data.delta.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = t_max * positive_uniform(rng);
      const bool event = s.event_time[i] <= c;
      s.data.t[i] = event ? s.event_time[i] : c;
      s.data.delta[static_cast<std::size_t>(i)] = event ? 1 : 0;
    }
    return s;
  }
  throw std::runtime_error("generate_sample: every regeneration produced an all-cured sample");
}

SurvivalDataset generate_dataset(const SimConfig& config, std::uint64_t replicate) {
  return generate_sample(config, replicate).data;
}

Estimator frequentist_estimator(double level, MleOptions options) {
  options.level = level;
  return [options](const SurvivalDataset& data, const ModelSpec& spec,
                   std::uint64_t) -> std::optional<ReplicateEstimate> {
    const FitResult fit = fit_mle(data, spec, std::nullopt, options);
    if (!fit.converged || !fit.covariance) return std::nullopt;
    ReplicateEstimate e;
    e.estimate = fit.theta_hat.natural();
    e.sd = fit.std_errors;
    const Eigen::Index k = e.estimate.size();
    e.lo.resize(k);
    e.hi.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      e.lo[j] = fit.ci[static_cast<std::size_t>(j)].first;
      e.hi[j] = fit.ci[static_cast<std::size_t>(j)].second;
    }
    return e;
  };
}

Estimator bayesian_estimator(int n_iter, int burn_in, double level) {
  return [=](const SurvivalDataset& data, const ModelSpec& spec,
             std::uint64_t seed) -> std::optional<ReplicateEstimate> {
    const PosteriorSample sample = sample_posterior(data, spec, PriorSpec::vague(spec), n_iter, burn_in, seed);
    if (!sample.draws.allFinite()) return std::nullopt;
    const auto summary = posterior_summary(sample, level);
    ReplicateEstimate e;
    const auto k = static_cast<Eigen::Index>(summary.size());
    e.estimate.resize(k);
    e.sd.resize(k);
    e.lo.resize(k);
    e.hi.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const ParamSummary& s = summary[static_cast<std::size_t>(j)];
      e.estimate[j] = s.mean;
      e.sd[j] = s.sd;
      e.lo[j] = s.lo;
      e.hi[j] = s.hi;
    }
    return e;
  };
}

MonteCarloReport monte_carlo(const SimConfig& config, const Estimator& estimator) {
  config.validate();
  const ModelSpec spec = config.spec();
  const Eigen::VectorXd truth = config.truth_natural();
  const Eigen::Index k = truth.size();
  const int reps = config.replicates;

  std::vector<std::optional<ReplicateEstimate>> results(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < reps; ++r) {
    try {
      const SurvivalDataset data = generate_dataset(config, static_cast<std::uint64_t>(r));
      auto est = estimator(data, spec, estimator_seed(config.seed, static_cast<std::uint64_t>(r)));
      if (est && est->estimate.size() == k && est->estimate.allFinite()) results[static_cast<std::size_t>(r)] = std::move(est);
    } catch (const std::exception&) {
      // counted as a failure below
    }
  }

  MonteCarloReport rep;
  rep.model = config.model;
  rep.n = config.n;
  rep.replicates = reps;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd sum_sd = Eigen::VectorXd::Zero(k), covered = Eigen::VectorXd::Zero(k);
  int ok = 0;
  for (const auto& res : results) {  // reduction in replicate order
    if (!res) {
      ++rep.failures;
      continue;
    }
    ++ok;
    sum += res->estimate;
    sum_sd += res->sd;
    for (Eigen::Index j = 0; j < k; ++j)
      if (res->lo[j] <= truth[j] && truth[j] <= res->hi[j]) covered[j] += 1.0;
  }
  if (rep.failures * 5 > reps)
    throw std::runtime_error("monte_carlo: " + std::to_string(rep.failures) + " of " + std::to_string(reps) +
                             " replicates failed (limit 20%)");

  // second pass about the mean; sum of squares cancels badly
  const Eigen::VectorXd mean = sum / ok;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(k);
  for (const auto& res : results)
    if (res) ss += (res->estimate - mean).cwiseAbs2();

  const std::vector<std::string> names = spec.param_names();
  for (Eigen::Index j = 0; j < k; ++j) {
    ParameterReport p;
    p.name = names[static_cast<std::size_t>(j)];
    p.truth = truth[j];
    p.mean = mean[j];
    p.mean_sd = sum_sd[j] / ok;
    p.bias_pct = (p.mean - p.truth) / p.truth * 100.0;
    p.coverage = covered[j] / ok;
    const double var = ok > 1 ? ss[j] / (ok - 1) : 0.0;
    p.mcse_bias_pct = std::sqrt(var / ok) / std::fabs(p.truth) * 100.0;
    rep.params.push_back(p);
  }
  return rep;
}

MonteCarloReport monte_carlo(const SimConfig& config, Engine engine) {
  return monte_carlo(config, engine == Engine::Frequentist ? frequentist_estimator() : bayesian_estimator());
}

void write_monte_carlo_csv(std::ostream& out, const std::vector<MonteCarloReport>& reports) {
  out << "model,n,replicates,failures,param,truth,mean,mean_sd,bias_pct,coverage,mcse_bias_pct\n";
  char buf[512];
  for (const auto& r : reports) {
    for (const auto& p : r.params) {
      std::snprintf(buf, sizeof buf, "%s,%lld,%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    model_name(r.model).c_str(), static_cast<long long>(r.n), r.replicates, r.failures,
                    p.name.c_str(), p.truth, p.mean, p.mean_sd, p.bias_pct, p.coverage, p.mcse_bias_pct);
      out << buf;
    }
  }
}

}  // namespace curesurv
