#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "curesurv/bayes.hpp"
#include "support.hpp"

using namespace curesurv;

namespace {

double sample_var(const Eigen::VectorXd& x) {
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("prior") {
  const ModelSpec spec{Model::MOGompertz, 2, 2};
  const PriorSpec p = PriorSpec::vague(spec);
  Eigen::VectorXd nat(5);
  nat << 0.1, 0.2, 0.3, 0.4, 2.0;
  CHECK(std::isfinite(log_prior(nat, spec, p)));
  nat[4] = 0.0;
  CHECK(log_prior(nat, spec, p) == -std::numeric_limits<double>::infinity());
  nat[4] = -1.0;
  CHECK(log_prior(nat, spec, p) == -std::numeric_limits<double>::infinity());
  PriorSpec bad = p;
  bad.lambda_rate = 0.0;
  CHECK_THROWS(bad.validate(spec));
}

TEST_CASE("a very flat prior shifts the log posterior by a constant") {
  const SurvivalDataset d = testing::synthetic(Model::Gompertz, 100, 1);
  const ModelSpec spec{Model::Gompertz, 3, 3};
  const PriorSpec p = PriorSpec::vague(spec, 1e4);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  Eigen::VectorXd center(6);
  center << -1.2, 0.5, 0.2, -1.1, 1.5, 0.9;
  double first = 0.0;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd v = center;
    for (Eigen::Index j = 0; j < 6; ++j) v[j] += u(rng);
    const ParamVector th = ParamVector::from_natural(spec, v);
    const double diff = log_posterior(th, d, p) - loglik(th, d);
    CHECK(diff == doctest::Approx(log_prior(v, spec, p)).epsilon(1e-12));
    if (k == 0) first = diff;
    CHECK(std::fabs(diff - first) < 1e-4);  // the kernel moves by |x|^2 / 2e4 at most
  }
}

TEST_CASE("kernels sample a standard normal") {
  const auto target = [](const Eigen::VectorXd& z) { return -0.5 * z.squaredNorm(); };
  for (Kernel k : {Kernel::Componentwise, Kernel::Block, Kernel::Langevin}) {
    CAPTURE(kernel_name(k));
    MetropolisOptions o;
    o.n_iter = 7000;
    o.burn_in = 2000;
    o.seed = 99;
    o.kernel = k;
    const ChainResult c = run_metropolis(target, Eigen::VectorXd::Constant(2, 0.5), o);
    REQUIRE(c.draws.rows() == 5000);
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK(std::fabs(c.draws.col(j).mean()) < 0.05 * (k == Kernel::Langevin ? 1.0 : 2.0));
      CHECK(std::fabs(sample_var(c.draws.col(j)) - 1.0) < 0.1);
    }
    CHECK(c.acceptance_rate > 0.15);
    CHECK(c.acceptance_rate < 0.9);
    // seeded chains replay exactly
    CHECK(run_metropolis(target, Eigen::VectorXd::Constant(2, 0.5), o).draws == c.draws);
  }
  CHECK(parse_kernel("mala") == Kernel::Langevin);
  CHECK_THROWS(parse_kernel("hmc"));
}

TEST_CASE("sampling the prior alone recovers its mean") {
  const ModelSpec spec{Model::MOGompertz, 1, 1};
  PriorSpec p = PriorSpec::vague(spec, 1.0);
  p.a_means[0] = 0.7;
  p.b_means[0] = -0.4;
  p.lambda_shape = 3.0;
  p.lambda_rate = 2.0;
  const auto target = [&](const Eigen::VectorXd& z) {
    const ParamVector th = ParamVector::from_internal(spec, z);
    return log_prior(th.natural(), spec, p) + th.log_lambda();
  };
  MetropolisOptions o;
  o.n_iter = 12000;
  o.burn_in = 2000;
  o.seed = 3;
  const ChainResult c = run_metropolis(target, Eigen::Vector3d::Zero(), o);
  // the standard error of each mean is about sd / sqrt(ESS), well under 0.06 here
  CHECK(c.draws.col(0).mean() == doctest::Approx(0.7).epsilon(0.06).scale(1.0));
  CHECK(c.draws.col(1).mean() == doctest::Approx(-0.4).epsilon(0.06).scale(1.0));
  CHECK(c.draws.col(2).array().exp().mean() == doctest::Approx(1.5).epsilon(0.1));
}

TEST_CASE("posterior sampler on synthetic data") {
  const SurvivalDataset d = testing::synthetic(Model::MOGompertz, 1000, 0, 31);
  const ModelSpec spec{Model::MOGompertz, 3, 3};
  const PriorSpec p = PriorSpec::vague(spec);
  const PosteriorSample s = sample_posterior(d, spec, p, 3000, 1000, 17);
  CHECK(s.size() == 2000);
  CHECK(s.names.size() == 7);
  CHECK((s.draws.col(6).array() > 0.0).all());  // natural-scale lambda
  const auto sum = posterior_summary(s, 0.95);
  const Eigen::VectorXd truth = SimConfig::reference_design(Model::MOGompertz, 1000, 1, 31).truth_natural();
  for (Eigen::Index j = 0; j < 7; ++j) {
    const auto& ps = sum[static_cast<std::size_t>(j)];
    CHECK(ps.lo <= ps.mean);
    CHECK(ps.mean <= ps.hi);
    CHECK(std::fabs(ps.mean - truth[j]) <= 3.0 * ps.sd);
    CHECK(s.rhat[j] < 1.1);
  }
  const PosteriorSample again = sample_posterior(d, spec, p, 3000, 1000, 17);
  CHECK(again.draws == s.draws);
  CHECK_THROWS(sample_posterior(d, spec, p, 1000, 1000, 1));
}

TEST_CASE("summaries and percentiles") {
  PosteriorSample s;
  s.names = {"c"};
  s.draws = Eigen::MatrixXd::Constant(1000, 1, 2.5);
  const auto c = posterior_summary(s, 0.95);
  CHECK(c[0].mean == 2.5);
  CHECK(c[0].sd == 0.0);
  CHECK(c[0].lo == 2.5);
  CHECK(c[0].hi == 2.5);

  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile_sorted(v, 0.025) == doctest::Approx(25.975).epsilon(1e-14));
  CHECK(percentile_sorted(v, 0.975) == doctest::Approx(975.025).epsilon(1e-14));
  s.draws = Eigen::Map<Eigen::VectorXd>(v.data(), 1000);
  const auto seq = posterior_summary(s, 0.95);
  CHECK(seq[0].lo == doctest::Approx(25.975));
  CHECK(seq[0].hi == doctest::Approx(975.025));

  s.draws = Eigen::MatrixXd::Constant(999, 1, 1.0);
  CHECK_THROWS(posterior_summary(s, 0.95));
}

TEST_CASE("effective sample size and split rhat") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Eigen::VectorXd iid(4000), ar(4000);
  double prev = 0.0;
  for (Eigen::Index i = 0; i < 4000; ++i) {
    iid[i] = nd(rng);
    prev = 0.9 * prev + nd(rng);
    ar[i] = prev;
  }
  CHECK(effective_sample_size(iid) > 3000.0);
  // AR(1) with rho 0.9: n (1 - rho) / (1 + rho), about 210
  const double ess = effective_sample_size(ar);
  CHECK(ess > 120.0);
  CHECK(ess < 350.0);
  CHECK(split_rhat(iid) < 1.01);
  Eigen::VectorXd drift = iid;
  drift.tail(2000).array() += 3.0;
  CHECK(split_rhat(drift) > 1.05);
}
