#include <doctest.h>

#include <cmath>
#include <sstream>

#include "curesurv/rng.hpp"
#include "curesurv/simulation.hpp"

using namespace curesurv;

TEST_CASE("streams") {
  Rng a = make_stream(5, 0), b = make_stream(5, 0), c = make_stream(5, 1), d = make_stream(6, 0);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  Rng u = make_stream(1, 2);
  for (int i = 0; i < 1000; ++i) {
    const double v = uniform01(u);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("generated samples") {
  for (Model m : {Model::MOGompertz, Model::MOInverseGaussian}) {
    const SimConfig cfg = SimConfig::reference_design(m, 400, 1, 42);
    const SimulatedSample s = generate_sample(cfg, 3);
    const SimulatedSample again = generate_sample(cfg, 3);
    CHECK(s.data.t == again.data.t);
    CHECK(s.data.delta == again.data.delta);
    CHECK(s.data.x.x1 == again.data.x.x1);
    CHECK(generate_sample(cfg, 4).data.t != s.data.t);

    double t_max = 0.0;
    for (Eigen::Index i = 0; i < s.data.size(); ++i)
      if (std::isfinite(s.event_time[i])) t_max = std::max(t_max, s.event_time[i]);
    for (Eigen::Index i = 0; i < s.data.size(); ++i) {
      const auto iu = static_cast<std::size_t>(i);
      if (!s.susceptible[iu]) {
        CHECK(s.data.delta[iu] == 0);  // cured rows are always censored
        CHECK(std::isinf(s.event_time[i]));
      } else {
        const MOLaw law = row_law(cfg.truth, s.data.x, i, m);
        CHECK(std::fabs(-std::expm1(mo_logsurv(s.event_time[i], law)) - s.u[i]) <= 1e-10);
      }
      CHECK(s.data.t[i] > 0.0);
      CHECK(s.data.t[i] <= t_max);
      CHECK((s.data.x.x1(i, 1) == 0.0 || s.data.x.x1(i, 1) == 1.0));
    }
    CHECK(s.data.censoring_fraction() > 0.0);
    CHECK(s.data.censoring_fraction() < 1.0);
  }
}

TEST_CASE("cured proportion follows the mean cure fraction") {
  const SimConfig cfg = SimConfig::reference_design(Model::MOGompertz, 100000, 1, 7);
  const SimulatedSample s = generate_sample(cfg, 0);
  double cured = 0.0;
  for (int v : s.susceptible) cured += v ? 0.0 : 1.0;
  CHECK(std::fabs(cured / 100000.0 - s.cure.mean()) < 0.01);
}

TEST_CASE("invalid truths") {
  SimConfig cfg = SimConfig::reference_design(Model::MOGompertz, 50, 1, 1);
  cfg.truth.a = Eigen::Vector3d(1.0, 0.5, 0.2);  // proper law: p = 0
  CHECK_THROWS_AS(generate_sample(cfg, 0), std::invalid_argument);
  cfg = SimConfig::reference_design(Model::MOGompertz, 5, 1, 1);
  CHECK_THROWS(generate_sample(cfg, 0));
  cfg = SimConfig::reference_design(Model::MOGompertz, 50, 1, 1);
  cfg.truth.lambda.reset();
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("monte carlo harness with stub estimators") {
  const SimConfig cfg = SimConfig::reference_design(Model::MOGompertz, 50, 40, 3);
  const Eigen::VectorXd truth = cfg.truth_natural();

  const Estimator exact = [&](const SurvivalDataset&, const ModelSpec&, std::uint64_t) {
    ReplicateEstimate e;
    e.estimate = truth;
    e.sd = Eigen::VectorXd::Constant(truth.size(), 0.1);
    e.lo = truth.array() - 1.0;
    e.hi = truth.array() + 1.0;
    return std::optional<ReplicateEstimate>(e);
  };
  const MonteCarloReport r = monte_carlo(cfg, exact);
  CHECK(r.failures == 0);
  for (const auto& p : r.params) {
    CHECK(std::fabs(p.bias_pct) < 1e-12);
    CHECK(p.coverage == 1.0);
    CHECK(p.mean_sd == doctest::Approx(0.1));
    CHECK(p.mcse_bias_pct == doctest::Approx(0.0).epsilon(1e-9));
  }

  // covers the truth on exactly 95% of the replicates
  SimConfig twenty = cfg;
  twenty.replicates = 20;
  const Estimator nominal = [&](const SurvivalDataset& d, const ModelSpec& s, std::uint64_t seed) {
    auto e = exact(d, s, seed);
    if (d.t[0] == generate_dataset(twenty, 7).t[0]) e->lo = truth.array() + 0.5;
    return e;
  };
  for (const auto& p : monte_carlo(twenty, nominal).params) CHECK(p.coverage == doctest::Approx(0.95));

  // failures are counted, and too many abort
  const Estimator flaky = [&](const SurvivalDataset& d, const ModelSpec& s, std::uint64_t seed) {
    return d.t[1] < 0.0 ? std::nullopt : exact(d, s, seed);
  };
  CHECK(monte_carlo(cfg, flaky).failures == 0);
  const Estimator broken = [&](const SurvivalDataset& d, const ModelSpec& s, std::uint64_t seed) {
    if (d.t[0] < d.t[1]) throw std::runtime_error("boom");
    return exact(d, s, seed);
  };
  CHECK_THROWS(monte_carlo(cfg, broken));

  // deterministic report, CSV mirrors it
  const MonteCarloReport again = monte_carlo(cfg, exact);
  std::ostringstream a, b;
  write_monte_carlo_csv(a, {r});
  write_monte_carlo_csv(b, {again});
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("model,n,replicates,failures,param,truth,mean,mean_sd,bias_pct,coverage", 0) == 0);
}

TEST_CASE("frequentist monte carlo is reproducible") {
  const SimConfig cfg = SimConfig::reference_design(Model::MOGompertz, 200, 6, 99);
  const MonteCarloReport a = monte_carlo(cfg, Engine::Frequentist);
  const MonteCarloReport b = monte_carlo(cfg, Engine::Frequentist);
  for (std::size_t j = 0; j < a.params.size(); ++j) {
    CHECK(a.params[j].mean == b.params[j].mean);
    CHECK(a.params[j].coverage == b.params[j].coverage);
  }
}
