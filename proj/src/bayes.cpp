#include "curesurv/bayes.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "curesurv/mle.hpp"
#include "curesurv/optim.hpp"
#include "curesurv/rng.hpp"

namespace curesurv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_draw(Rng& rng) {
  // Box-Muller from our own uniforms so draws do not depend on the
  // standard library's distribution implementation.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

bool accept(Rng& rng, double log_ratio) {
  if (log_ratio >= 0.0) return true;
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  return std::log(u) < log_ratio;
}

// Robbins-Monro gain.
double gain(int t) { return std::min(1.0, 3.0 / std::pow(t + 1.0, 0.6)); }

std::optional<Eigen::MatrixXd> cholesky_of(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return Eigen::MatrixXd(llt.matrixL());
}

// Running covariance of the burn-in path; refreshed every 100 samples once
// 200 are in.
struct CovLearner {
  Eigen::VectorXd mean;
  Eigen::MatrixXd m2;
  long seen = 0;

  explicit CovLearner(Eigen::Index d) : mean(Eigen::VectorXd::Zero(d)), m2(Eigen::MatrixXd::Zero(d, d)) {}

  // true when cov and L were replaced
  bool push(const Eigen::VectorXd& z, Eigen::MatrixXd& cov, Eigen::MatrixXd& L) {
    ++seen;
    const Eigen::VectorXd delta = z - mean;
    mean += delta / static_cast<double>(seen);
    m2 += delta * (z - mean).transpose();
    if (seen < 200 || seen % 100 != 0) return false;
    Eigen::MatrixXd emp = m2 / static_cast<double>(seen - 1);
    emp = 0.5 * (emp + emp.transpose());
    emp.diagonal().array() += 1e-10;
    auto chol = cholesky_of(emp);
    if (!chol) return false;
    L = *chol;
    cov = emp;
    return true;
  }
};

ChainResult run_componentwise(const std::function<double(const Eigen::VectorXd&)>& log_target,
                              Eigen::VectorXd z, double lp, const MetropolisOptions& o, Rng& rng) {
  constexpr double kTarget = 0.40;
  const Eigen::Index d = z.size();
  Eigen::VectorXd log_scale(d);
  for (Eigen::Index j = 0; j < d; ++j)
    log_scale[j] = std::log(o.initial_cov ? 2.4 * std::sqrt(std::max((*o.initial_cov)(j, j), 1e-12)) : 0.1);

  ChainResult out;
  out.draws.resize(o.n_iter - o.burn_in, d);
  long accepted = 0;
  for (int it = 0; it < o.n_iter; ++it) {
    const bool adapting = it < o.burn_in;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double old = z[j];
      z[j] = old + std::exp(log_scale[j]) * normal_draw(rng);
      const double lp_new = log_target(z);
      const bool ok = std::isfinite(lp_new) && accept(rng, lp_new - lp);
      if (ok) lp = lp_new;
      else z[j] = old;
      if (adapting) log_scale[j] += gain(it) * ((ok ? 1.0 : 0.0) - kTarget);
      else if (ok) ++accepted;
    }
    if (!adapting) out.draws.row(it - o.burn_in) = z.transpose();
  }
  const double proposals = static_cast<double>(o.n_iter - o.burn_in) * static_cast<double>(d);
  out.acceptance_rate = proposals > 0 ? accepted / proposals : 0.0;
  out.final_scales = log_scale.array().exp();
  return out;
}

ChainResult run_block(const std::function<double(const Eigen::VectorXd&)>& log_target,
                      Eigen::VectorXd z, double lp, const MetropolisOptions& o, Rng& rng) {
  constexpr double kTarget = 0.30;
  const Eigen::Index d = z.size();
  Eigen::MatrixXd cov = o.initial_cov ? *o.initial_cov : Eigen::MatrixXd(0.01 * Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd L = cholesky_of(cov).value_or(Eigen::MatrixXd(0.1 * Eigen::MatrixXd::Identity(d, d)));
  double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));

  // Running moments of the burn-in path, used from a quarter of the way in.
  const int learn_from = o.burn_in / 4;
  CovLearner learner(d);

  ChainResult out;
  out.draws.resize(o.n_iter - o.burn_in, d);
  long accepted = 0;
  Eigen::VectorXd xi(d);
  for (int it = 0; it < o.n_iter; ++it) {
    const bool adapting = it < o.burn_in;
    for (Eigen::Index j = 0; j < d; ++j) xi[j] = normal_draw(rng);
    const Eigen::VectorXd prop = z + std::exp(log_scale) * (L * xi);
    const double lp_new = log_target(prop);
    const bool ok = std::isfinite(lp_new) && accept(rng, lp_new - lp);
    if (ok) {
      z = prop;
      lp = lp_new;
    }
    if (adapting) {
      log_scale += gain(it) * ((ok ? 1.0 : 0.0) - kTarget);
      if (it >= learn_from) learner.push(z, cov, L);
    } else {
      if (ok) ++accepted;
      out.draws.row(it - o.burn_in) = z.transpose();
    }
  }
  const long kept = o.n_iter - o.burn_in;
  out.acceptance_rate = kept > 0 ? static_cast<double>(accepted) / static_cast<double>(kept) : 0.0;
  out.final_scales = (std::exp(log_scale) * cov.diagonal().cwiseSqrt()).eval();
  return out;
}

ChainResult run_langevin(const std::function<double(const Eigen::VectorXd&)>& log_target,
                         Eigen::VectorXd z, double lp, const MetropolisOptions& o, Rng& rng) {
  constexpr double kTarget = 0.574;
  const Eigen::Index d = z.size();
  Eigen::MatrixXd cov = o.initial_cov ? *o.initial_cov : Eigen::MatrixXd(0.01 * Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd L = Eigen::MatrixXd(0.1 * Eigen::MatrixXd::Identity(d, d));
  if (auto chol = cholesky_of(cov)) L = *chol;
  else cov = L * L.transpose();
  double log_scale = std::log(1.65 / std::pow(static_cast<double>(d), 1.0 / 6.0));

  auto gradient = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
    try {
      g = numeric_gradient(log_target, v);
      return g.allFinite();
    } catch (const NonFiniteError&) {
      return false;
    }
  };
  Eigen::VectorXd g(d), g_new(d);
  if (!gradient(z, g)) throw std::invalid_argument("run_metropolis: gradient not available at the start");

  const int learn_from = o.burn_in / 4;
  CovLearner learner(d);
  ChainResult out;
  out.draws.resize(o.n_iter - o.burn_in, d);
  long accepted = 0;
  Eigen::VectorXd xi(d);
  for (int it = 0; it < o.n_iter; ++it) {
    const bool adapting = it < o.burn_in;
    const double eps = std::exp(log_scale);
    const double half_eps2 = 0.5 * eps * eps;
    for (Eigen::Index j = 0; j < d; ++j) xi[j] = normal_draw(rng);
    const Eigen::VectorXd prop = z + half_eps2 * (cov * g) + eps * (L * xi);
    const double lp_new = log_target(prop);
    bool ok = false;
    if (std::isfinite(lp_new) && gradient(prop, g_new)) {
      // reverse move residual, whitened by L
      const Eigen::VectorXd back = z - prop - half_eps2 * (cov * g_new);
      const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(back);
      const double log_q = -(w.squaredNorm() / (eps * eps) - xi.squaredNorm()) * 0.5;
      ok = accept(rng, lp_new - lp + log_q);
    }
    if (ok) {
      z = prop;
      lp = lp_new;
      g = g_new;
    }
    if (adapting) {
      log_scale += gain(it) * ((ok ? 1.0 : 0.0) - kTarget);
      if (it >= learn_from) learner.push(z, cov, L);
    } else {
      if (ok) ++accepted;
      out.draws.row(it - o.burn_in) = z.transpose();
    }
  }
  const long kept = o.n_iter - o.burn_in;
  out.acceptance_rate = kept > 0 ? static_cast<double>(accepted) / static_cast<double>(kept) : 0.0;
  out.final_scales = (std::exp(log_scale) * cov.diagonal().cwiseSqrt()).eval();
  return out;
}

double log_normal_kernel(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * r * r / var;
}

// Mode of the sampling-space target and its inverse negative curvature.
struct ModeInfo {
  Eigen::VectorXd z;
  std::optional<Eigen::MatrixXd> cov;
};

ModeInfo find_mode(const std::function<double(const Eigen::VectorXd&)>& target,
                   const SurvivalDataset& data, const ModelSpec& spec) {
  ModeInfo info;
  MleOptions mopts;
  mopts.compute_covariance = false;
  Eigen::VectorXd start = default_init(data, spec).internal();
  try {
    const FitResult fit = fit_mle(data, spec, std::nullopt, mopts);
    if (std::isfinite(fit.loglik_max) && std::isfinite(target(fit.theta_hat.internal())))
      start = fit.theta_hat.internal();
  } catch (const std::exception&) {
  }
  auto grad = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
    try {
      g = numeric_gradient(target, v);
      return true;
    } catch (const NonFiniteError&) {
      return false;
    }
  };
  const BfgsResult r = maximize_bfgs(target, grad, start);
  info.z = std::isfinite(r.value) ? r.x : start;
  try {
    const Eigen::MatrixXd H = numeric_hessian(target, info.z);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-H);
    if (es.eigenvalues().minCoeff() > 0.0) {
      Eigen::MatrixXd cov = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
      info.cov = 0.5 * (cov + cov.transpose());
    }
  } catch (const NonFiniteError&) {
  }
  return info;
}

}  // namespace

Kernel parse_kernel(std::string_view name) {
  if (name == "langevin" || name == "mala") return Kernel::Langevin;
  if (name == "block") return Kernel::Block;
  if (name == "componentwise") return Kernel::Componentwise;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "' (expected langevin, block or componentwise)");
}

std::string kernel_name(Kernel kernel) {
  switch (kernel) {
    case Kernel::Langevin: return "langevin";
    case Kernel::Block: return "block";
    case Kernel::Componentwise: return "componentwise";
  }
  return "?";
}

PriorSpec PriorSpec::vague(const ModelSpec& spec, double variance) {
  PriorSpec p;
  p.a_means = Eigen::VectorXd::Zero(spec.alpha_dim);
  p.a_vars = Eigen::VectorXd::Constant(spec.alpha_dim, variance);
  p.b_means = Eigen::VectorXd::Zero(spec.beta_dim);
  p.b_vars = Eigen::VectorXd::Constant(spec.beta_dim, variance);
  return p;
}

void PriorSpec::validate(const ModelSpec& spec) const {
  if (a_means.size() != spec.alpha_dim || a_vars.size() != spec.alpha_dim ||
      b_means.size() != spec.beta_dim || b_vars.size() != spec.beta_dim)
    throw std::invalid_argument("prior: dimensions do not match the model");
  if (!(a_vars.array() > 0.0).all() || !(b_vars.array() > 0.0).all())
    throw std::invalid_argument("prior: variances must be positive");
  if (!(lambda_shape > 0.0) || !(lambda_rate > 0.0))
    throw std::invalid_argument("prior: Gamma hyperparameters must be positive");
}

double log_prior(const Eigen::VectorXd& natural, const ModelSpec& spec, const PriorSpec& prior) {
  if (natural.size() != spec.n_params()) throw std::invalid_argument("log_prior: wrong length");
  double lp = 0.0;
  for (Eigen::Index j = 0; j < spec.alpha_dim; ++j)
    lp += log_normal_kernel(natural[j], prior.a_means[j], prior.a_vars[j]);
  for (Eigen::Index j = 0; j < spec.beta_dim; ++j)
    lp += log_normal_kernel(natural[spec.alpha_dim + j], prior.b_means[j], prior.b_vars[j]);
  if (spec.has_lambda()) {
    const double lambda = natural[natural.size() - 1];
    if (!(lambda > 0.0)) return kNegInf;
    lp += (prior.lambda_shape - 1.0) * std::log(lambda) - prior.lambda_rate * lambda;
  }
  return lp;
}

double log_posterior_natural(const Eigen::VectorXd& natural, const SurvivalDataset& data,
                             const ModelSpec& spec, const PriorSpec& prior) {
  if (!natural.allFinite()) return kNegInf;
  const double lp = log_prior(natural, spec, prior);
  if (!std::isfinite(lp)) return kNegInf;
  return lp + loglik(ParamVector::from_natural(spec, natural), data);
}

double log_posterior(const ParamVector& theta, const SurvivalDataset& data, const PriorSpec& prior) {
  return log_posterior_natural(theta.natural(), data, theta.spec(), prior);
}

ChainResult run_metropolis(const std::function<double(const Eigen::VectorXd&)>& log_target,
                           const Eigen::VectorXd& init, const MetropolisOptions& options) {
  if (!(options.n_iter > options.burn_in) || options.burn_in < 0)
    throw std::invalid_argument("run_metropolis: need n_iter > burn_in >= 0");
  const double lp0 = log_target(init);
  if (!std::isfinite(lp0)) throw std::invalid_argument("run_metropolis: initial log density is not finite");
  Rng rng = make_stream(options.seed, 0);
  switch (options.kernel) {
    case Kernel::Componentwise: return run_componentwise(log_target, init, lp0, options, rng);
    case Kernel::Block: return run_block(log_target, init, lp0, options, rng);
    case Kernel::Langevin: break;
  }
  return run_langevin(log_target, init, lp0, options, rng);
}

PosteriorSample sample_posterior(const SurvivalDataset& data, const ModelSpec& spec,
                                 const PriorSpec& prior, int n_iter, int burn_in, std::uint64_t seed) {
  SamplerOptions o;
  o.n_iter = n_iter;
  o.burn_in = burn_in;
  o.seed = seed;
  return sample_posterior(data, spec, prior, o);
}

PosteriorSample sample_posterior(const SurvivalDataset& data, const ModelSpec& spec,
                                 const PriorSpec& prior, const SamplerOptions& options) {
  data.validate();
  prior.validate(spec);
  if (!(options.n_iter > options.burn_in) || options.burn_in < 0)
    throw std::invalid_argument("sample_posterior: need n_iter > burn_in >= 0");

  // Sampling space: internal parameters (log lambda) plus the Jacobian.
  const auto target = [&](const Eigen::VectorXd& z) {
    const ParamVector th = ParamVector::from_internal(spec, z);
    const double lp = log_posterior(th, data, prior);
    return th.has_lambda() ? lp + th.log_lambda() : lp;
  };

  MetropolisOptions mo;
  mo.n_iter = options.n_iter;
  mo.burn_in = options.burn_in;
  mo.seed = options.seed;
  mo.kernel = options.kernel;
  Eigen::VectorXd z0;
  if (options.init) {
    z0 = options.init->internal();
  } else if (options.start_at_mode) {
    ModeInfo mode = find_mode(target, data, spec);
    z0 = mode.z;
    mo.initial_cov = mode.cov;
  } else {
    z0 = default_init(data, spec).internal();
  }
  if (!std::isfinite(target(z0)))
    throw std::invalid_argument("sample_posterior: initial posterior density is not finite");

  const ChainResult chain = run_metropolis(target, z0, mo);

  PosteriorSample out;
  out.names = spec.param_names();
  out.draws = chain.draws;
  if (spec.has_lambda()) out.draws.col(out.draws.cols() - 1) = out.draws.col(out.draws.cols() - 1).array().exp();
  out.burn_in = options.burn_in;
  out.seed = options.seed;
  out.acceptance_rate = chain.acceptance_rate;
  const Eigen::Index d = out.draws.cols();
  out.ess.resize(d);
  out.rhat.resize(d);
  out.passed_convergence_gate = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    out.ess[j] = effective_sample_size(out.draws.col(j));
    out.rhat[j] = split_rhat(out.draws.col(j));
    if (!(out.rhat[j] <= kRhatGate) || !(out.ess[j] >= kEssGate)) out.passed_convergence_gate = false;
  }
  if (out.acceptance_rate < 0.01)
    out.warnings.emplace_back("acceptance rate below 1%: the chain is essentially stuck");
  if (!out.passed_convergence_gate)
    out.warnings.emplace_back("convergence gate failed (split R-hat <= 1.05 and ESS >= 400 required)");
  return out;
}

double effective_sample_size(const Eigen::VectorXd& chain) {
  const Eigen::Index n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const Eigen::VectorXd c = chain.array() - chain.mean();
  const double g0 = c.squaredNorm() / static_cast<double>(n);
  if (!(g0 > 0.0)) return static_cast<double>(n);
  auto rho = [&](Eigen::Index lag) {
    return c.head(n - lag).dot(c.tail(n - lag)) / (static_cast<double>(n) * g0);
  };
  // Geyer: sum of adjacent-pair autocorrelations while positive, made monotone.
  double tau = -1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));  // guard antithetic chains
  return static_cast<double>(n) / tau;
}

double split_rhat(const Eigen::VectorXd& chain) {
  const Eigen::Index half = chain.size() / 2;
  if (half < 2) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd first = chain.head(half);
  const Eigen::VectorXd second = chain.tail(half);
  const double n = static_cast<double>(half);
  auto var = [](const Eigen::VectorXd& x) {
    return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
  };
  const double w = 0.5 * (var(first) + var(second));
  const double m1 = first.mean(), m2 = second.mean();
  const double b = n * 0.5 * (m1 - m2) * (m1 - m2);  // n * var of the two means
  if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double percentile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("percentile_sorted: empty input");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("percentile_sorted: prob outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<ParamSummary> posterior_summary(const PosteriorSample& sample, double level) {
  if (sample.size() < kMinSummaryDraws)
    throw std::invalid_argument("posterior_summary: need at least " + std::to_string(kMinSummaryDraws) +
                                " draws, have " + std::to_string(sample.size()));
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("posterior_summary: level outside (0, 1)");
  std::vector<ParamSummary> out;
  const double tail = 0.5 * (1.0 - level);
  for (Eigen::Index j = 0; j < sample.draws.cols(); ++j) {
    const Eigen::VectorXd col = sample.draws.col(j);
    ParamSummary s;
    s.name = j < static_cast<Eigen::Index>(sample.names.size()) ? sample.names[static_cast<std::size_t>(j)]
                                                                  : "p" + std::to_string(j);
    s.mean = col.mean();
    s.sd = std::sqrt((col.array() - s.mean).square().sum() / static_cast<double>(col.size() - 1));
    std::vector<double> sorted(col.data(), col.data() + col.size());
    std::sort(sorted.begin(), sorted.end());
    s.lo = percentile_sorted(sorted, tail);
    s.hi = percentile_sorted(sorted, 1.0 - tail);
    out.push_back(std::move(s));
  }
  return out;
}

ParamVector posterior_mean(const PosteriorSample& sample, const ModelSpec& spec) {
  if (sample.size() == 0) throw std::invalid_argument("posterior_mean: empty sample");
  return ParamVector::from_natural(spec, sample.draws.colwise().mean().transpose());
}

}  // namespace curesurv
