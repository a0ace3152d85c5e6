#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "curesurv/selection.hpp"
#include "support.hpp"

using namespace curesurv;

TEST_CASE("information criteria") {
  const InfoCriteria zero = info_criteria(0.0, 0, 10);
  CHECK(zero.aicc == 0.0);
  CHECK(zero.bic == 0.0);
  CHECK(zero.hqic == 0.0);
  CHECK(zero.caic == 0.0);
  CHECK(info_criteria(-100.0, 3, 50).aicc == doctest::Approx(206.5217391304348).epsilon(1e-14));
  const InfoCriteria colon = info_criteria(-1385.44, 5, 929);
  CHECK(colon.aicc == doctest::Approx(2780.95).epsilon(1e-5));
  CHECK(colon.bic == doctest::Approx(2805.06).epsilon(1e-5));
  CHECK(colon.hqic == doctest::Approx(2790.11).epsilon(1e-5));
  CHECK(colon.caic == doctest::Approx(2810.06).epsilon(1e-5));
  CHECK_THROWS(info_criteria(0.0, 5, 6));
}

TEST_CASE("cpo") {
  Eigen::MatrixXd one(1, 3);
  one << -0.5, -1.25, -3.0;
  const CpoResult r = cpo_lpml(one);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(r.log_cpo[i] == one(0, i));
  CHECK(r.lpml == doctest::Approx(-4.75).epsilon(1e-15));

  Eigen::MatrixXd two(2, 1);
  two << -1.0, -3.0;
  const double expected = 2.0 / (std::exp(1.0) + std::exp(3.0));
  CHECK(std::exp(cpo_lpml(two).log_cpo[0]) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(std::exp(cpo_lpml(two).log_cpo[0]) == doctest::Approx(0.08770460867899924).epsilon(1e-14));

  // a draw with zero density zeroes the harmonic mean
  Eigen::MatrixXd dead(2, 2);
  dead << -1.0, -std::numeric_limits<double>::infinity(), -2.0, -1.0;
  const CpoResult d = cpo_lpml(dead);
  REQUIRE(d.flagged.size() == 1);
  CHECK(d.flagged[0] == 1);
  CHECK(std::isfinite(d.lpml));
}

TEST_CASE("dic") {
  const std::vector<double> dev{10.0, 12.0, 14.0};
  const DicResult r = dic_from_deviance(dev);
  CHECK(r.dic == doctest::Approx(14.0).epsilon(1e-15));
  CHECK(r.mean_deviance == 12.0);
  CHECK(r.var_deviance == 4.0);
  const std::vector<double> with_nan{10.0, std::numeric_limits<double>::quiet_NaN(), 12.0, 14.0};
  CHECK(dic_from_deviance(with_nan).excluded == 1);
  CHECK(dic_from_deviance(with_nan).dic == 14.0);
  const std::vector<double> none{std::numeric_limits<double>::infinity()};
  CHECK_THROWS(dic_from_deviance(none));
}

TEST_CASE("waic") {
  Eigen::MatrixXd two(2, 1);
  two << -1.0, -3.0;
  const WaicResult w = waic(two);
  CHECK(w.lpd == doctest::Approx(-1.566219169516973).epsilon(1e-14));
  CHECK(w.pd == doctest::Approx(0.8675616609660544).epsilon(1e-14));
  CHECK(w.waic == doctest::Approx(-2.433780830483027).epsilon(1e-14));
  CHECK(w.minus2() == doctest::Approx(4.867561660966054).epsilon(1e-14));

  Eigen::MatrixXd bad(3, 1);
  bad << -1.0, std::numeric_limits<double>::quiet_NaN(), -3.0;
  const WaicResult wb = waic(bad);
  CHECK(wb.excluded == 1);
  CHECK(wb.waic == doctest::Approx(w.waic).epsilon(1e-14));
}

TEST_CASE("constant chains reduce to plug-in values") {
  Eigen::MatrixXd c(50, 4);
  for (Eigen::Index s = 0; s < 50; ++s) c.row(s) << -0.3, -1.1, -2.7, -0.05;
  const double plug = c.row(0).sum();
  const WaicResult w = waic(c);
  CHECK(std::fabs(w.pd) <= 1e-12);
  CHECK(std::fabs(w.waic - w.lpd) <= 1e-12);
  CHECK(std::fabs(w.lpd - plug) <= 1e-12);
  const DicResult d = dic(c);
  CHECK(d.var_deviance == 0.0);
  CHECK(std::fabs(d.dic + 2.0 * plug) <= 1e-12);
  const CpoResult p = cpo_lpml(c);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::fabs(p.log_cpo[i] - c(0, i)) <= 1e-12);
}

TEST_CASE("contribution matrix and reports from a posterior sample") {
  const SurvivalDataset d = testing::synthetic(Model::MOGompertz, 60, 9);
  const ModelSpec spec{Model::MOGompertz, 3, 3};
  PosteriorSample s;
  s.names = spec.param_names();
  Eigen::VectorXd nat(7);
  nat << -1.2, 0.5, 0.2, -1.1, 1.5, 0.9, 2.0;
  s.draws = nat.transpose().replicate(1000, 1);
  const Eigen::MatrixXd m = contribution_matrix(s, d, spec);
  CHECK(m.rows() == 1000);
  CHECK(m.cols() == 60);
  const double l = loglik(ParamVector::from_natural(spec, nat), d);
  CHECK(m.row(0).sum() == doctest::Approx(l).epsilon(1e-12));

  const CriteriaReport r = criteria_report(nullptr, &s, d, spec);
  CHECK_FALSE(r.aicc);
  REQUIRE(r.lpml);
  CHECK(*r.lpml == doctest::Approx(l).epsilon(1e-12));
  CHECK(*r.dic == doctest::Approx(-2.0 * l).epsilon(1e-12));
  CHECK(*r.minus2_waic() == doctest::Approx(-2.0 * l).epsilon(1e-12));

  s.draws = s.draws.topRows(999).eval();
  CHECK_THROWS(waic(s, d, spec));
}
