#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "curesurv/diagnostics.hpp"
#include "curesurv/mle.hpp"
#include "support.hpp"

using namespace curesurv;

TEST_CASE("residual triples") {
  CHECK(martingale_residual(1, 0.0) == 1.0);
  CHECK(martingale_residual(0, 0.0) == 0.0);
  CHECK(deviance_residual(0, 0.0) == 0.0);
  CHECK(martingale_residual(1, -1.0) == 0.0);
  CHECK(deviance_residual(1, 0.0) == 0.0);
  CHECK(martingale_residual(0, -1.0) == -1.0);
  CHECK(deviance_residual(0, -1.0) == -std::sqrt(2.0));
  // r_M = 1 sits on the log(0) edge
  CHECK(deviance_residual(1, 1.0) == std::sqrt(2.0));
  // delta = 1, r_M = 0.5: sqrt(-2 (0.5 + log 0.5))
  CHECK(deviance_residual(1, 0.5) == doctest::Approx(std::sqrt(-2.0 * (0.5 + std::log(0.5)))).epsilon(1e-15));
}

TEST_CASE("residual contracts on a fit") {
  const SurvivalDataset d = testing::synthetic(Model::MOInverseGaussian, 300, 2);
  const FitResult fit = fit_mle(d, ModelSpec{Model::MOInverseGaussian, 3, 3});
  const ResidualReport r = residuals(fit, d);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const int delta = d.delta[static_cast<std::size_t>(i)];
    CHECK(r.martingale[i] <= delta);
    if (r.martingale[i] > 0.0) CHECK(r.deviance[i] > 0.0);
    if (r.martingale[i] < 0.0) CHECK(r.deviance[i] < 0.0);
  }
}

TEST_CASE("generalized cook distance and relative change") {
  Eigen::MatrixXd cov(2, 2);
  cov << 4.0, 0.0, 0.0, 1.0;
  CHECK(generalized_cook_distance(Eigen::Vector2d(2.0, 1.0), cov) == doctest::Approx(2.0));
  CHECK_THROWS(generalized_cook_distance(Eigen::Vector3d::Zero(), cov));

  const ModelSpec spec{Model::Gompertz, 1, 1};
  FitResult full(spec), dropped(spec);
  full.theta_hat = ParamVector::from_natural(spec, Eigen::Vector2d(2.0, 0.0));
  dropped.theta_hat = ParamVector::from_natural(spec, Eigen::Vector2d(1.5, 0.3));
  full.std_errors = Eigen::Vector2d(0.5, 0.1);
  dropped.std_errors = Eigen::Vector2d(0.4, 0.1);
  const RelativeChange rc = relative_change(full, dropped);
  CHECK(rc.rc_theta[0] == doctest::Approx(25.0));
  CHECK(std::isnan(rc.rc_theta[1]));
  REQUIRE(rc.undefined.size() == 1);
  CHECK(rc.rc_se[0] == doctest::Approx(20.0));
  CHECK(rc.rc_se[1] == 0.0);
  const RelativeChange same = relative_change(full, full);
  CHECK(same.rc_theta[0] == 0.0);
}

TEST_CASE("flagging rules") {
  Eigen::VectorXd gd(10), ld(10);
  gd << 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 5.0;
  ld << 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0;
  double gt = 0.0, lt = 0.0;
  const auto f = flag_influential(gd, ld, 2, InfluenceOptions{}, &gt, &lt);
  CHECK(gt == doctest::Approx(2.0 * 0.59 * 2.0));
  CHECK(f == std::vector<Eigen::Index>{8, 9});
}

TEST_CASE("case deletion influence") {
  SurvivalDataset d = testing::synthetic(Model::Gompertz, 100, 5);
  // contaminate: the longest event time becomes a gross outlier
  Eigen::Index target = -1;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d.delta[static_cast<std::size_t>(i)] == 1 && (target < 0 || d.t[i] > d.t[target])) target = i;
  REQUIRE(target >= 0);
  d.t[target] = 20.0 * d.t.maxCoeff();
  const ModelSpec spec{Model::Gompertz, 3, 3};
  const FitResult fit = fit_mle(d, spec);
  REQUIRE(fit.covariance_internal);
  const InfluenceReport rep = case_deletion_influence(fit, d);
  CHECK(rep.failed.empty());
  Eigen::Index arg = 0;
  rep.gd.maxCoeff(&arg);
  CHECK(arg == target);
  CHECK(std::binary_search(rep.flagged.begin(), rep.flagged.end(), target));
  CHECK((rep.ld.array() >= 0.0).all());

  // a duplicated row barely moves anything when one copy is dropped
  SurvivalDataset dup = testing::synthetic(Model::Gompertz, 150, 6);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < dup.size(); ++i) {
    rows.push_back(i);
    rows.push_back(i);
  }
  dup = dup.select_rows(rows);
  const FitResult fd = fit_mle(dup, spec);
  const InfluenceReport rd = case_deletion_influence(fd, dup);
  CHECK(rd.gd.minCoeff() < 1e-2);
  CHECK(rd.ld.minCoeff() < 1e-2);

  FitResult unconverged = fit;
  unconverged.converged = false;
  CHECK_THROWS(case_deletion_influence(unconverged, d));
}
