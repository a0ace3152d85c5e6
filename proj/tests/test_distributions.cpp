#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "curesurv/distributions.hpp"
#include "support.hpp"

using namespace curesurv;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double density(double t, const MOLaw& law) { return t > 0.0 ? std::exp(mo_logpdf(t, law)) : 0.0; }

MOLaw mo(Family fam, double a, double b, double l = 1.0) { return MOLaw{BaseLaw{fam, a, b}, l}; }

}  // namespace

TEST_CASE("gompertz log density and survival") {
  CHECK(gompertz_logpdf(1e-300, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gompertz_logpdf(1.0, -0.5, 0.5) == doctest::Approx(-1.5866165208473118858).epsilon(1e-14));
  CHECK(gompertz_logsurv(0.0, 1.0, 1.0) == 0.0);
  CHECK(gompertz_logsurv(1.0, 0.5, 2.0) == doctest::Approx(-2.5948850828005125874).epsilon(1e-14));
  CHECK(gompertz_logsurv(1e6, -1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(gompertz_logsurv(kInf, -1.0, 1.0) == -1.0);
  CHECK(gompertz_logsurv(kInf, 1.0, 1.0) == -kInf);
  CHECK_THROWS_AS(gompertz_logpdf(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gompertz_logsurv(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gompertz_logsurv(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("inverse gaussian log density and survival") {
  CHECK(invgauss_logpdf(1.0, 1.0, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-15));
  CHECK(invgauss_logsurv(0.0, 1.0, 1.0) == 0.0);
  CHECK(std::exp(invgauss_logsurv(1.0, 1.0, 1.0)) == doctest::Approx(0.33189799877682939357).epsilon(1e-14));
  CHECK(invgauss_logsurv(1e6, -1.0, 2.0) == doctest::Approx(std::log(-std::expm1(-1.0))).epsilon(1e-12));
  CHECK(invgauss_logsurv(kInf, -1.0, 2.0) == doctest::Approx(std::log(-std::expm1(-1.0))).epsilon(1e-15));
  CHECK(invgauss_logsurv(1e-8, 0.5, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  // deep right tail of a proper law: finite and decreasing, or -inf, never NaN
  double prev = 0.0;
  for (double t : {10.0, 100.0, 1000.0, 1e5}) {
    const double v = invgauss_logsurv(t, 1.0, 1.0);
    CHECK_FALSE(std::isnan(v));
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("cure fractions") {
  const auto g = cure_fraction(BaseLaw{Family::Gompertz, -1.0, 1.0});
  CHECK(g.p0 == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(std::exp(gompertz_logsurv(1e6, -1.0, 1.0)) == doctest::Approx(g.p0).epsilon(1e-14));
  const auto ig = cure_fraction(BaseLaw{Family::InverseGaussian, -1.0, 2.0});
  CHECK(ig.p0 == doctest::Approx(0.63212055882855767840).epsilon(1e-15));
  CHECK(std::exp(invgauss_logsurv(1e6, -1.0, 2.0)) == doctest::Approx(ig.p0).epsilon(1e-10));
  CHECK(cure_fraction(BaseLaw{Family::Gompertz, 0.3, 1.0}).p == 0.0);

  const auto m = cure_fraction(mo(Family::InverseGaussian, -1.0, 2.0, 0.5));
  CHECK(m.p == doctest::Approx(0.46211715726000976).epsilon(1e-14));
  CHECK(m.p0 == doctest::Approx(ig.p0));

  // colon-style values
  const auto colon = cure_fraction(mo(Family::Gompertz, -0.4371, std::exp(0.4478), 40.9295));
  CHECK(colon.p0 == doctest::Approx(0.02787).epsilon(2e-3));
  CHECK(colon.p == doctest::Approx(0.5399).epsilon(1e-3));
  const auto bayes = cure_fraction(mo(Family::Gompertz, -0.4262, std::exp(0.3877), 38.8549));
  CHECK(bayes.p == doctest::Approx(0.5583).epsilon(1e-3));
}

TEST_CASE("marshall-olkin reduces to the base law at lambda = 1") {
  for (Family fam : {Family::Gompertz, Family::InverseGaussian})
    for (double t : {0.0, 0.1, 1.0, 7.5}) {
      const MOLaw law = mo(fam, -0.7, 1.3, 1.0);
      CHECK(mo_logsurv(t, law) == base_logsurv(t, law.base));
      if (t > 0.0) CHECK(mo_logpdf(t, law) == base_logpdf(t, law.base));
    }
  for (double l : {0.1, 3.0, 50.0}) CHECK(mo_logsurv(0.0, mo(Family::Gompertz, 1.0, 1.0, l)) == 0.0);
  CHECK_THROWS_AS(mo_logsurv(1.0, mo(Family::Gompertz, 1.0, 1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("masses by quadrature") {
  using testing::mass;
  CHECK(mass([](double t) { return density(t, mo(Family::Gompertz, 0.7, 0.3)); }) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mass([](double t) { return density(t, mo(Family::InverseGaussian, 0.8, 0.5)); }) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mass([](double t) { return density(t, mo(Family::InverseGaussian, -1.0, 2.0)); }) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(mass([](double t) { return density(t, mo(Family::Gompertz, 0.7, 0.3, 2.0)); }) ==
        doctest::Approx(1.0).epsilon(1e-9));
  const MOLaw law = mo(Family::InverseGaussian, -1.0, 2.0, 0.5);
  CHECK(mass([&](double t) { return density(t, law); }) == doctest::Approx(1.0 - cure_fraction(law).p).epsilon(1e-9));
}

TEST_CASE("density is minus the derivative of survival") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(-1.5, 1.5), ub(0.2, 3.0), ul(0.2, 5.0), ut(0.05, 4.0);
  for (int k = 0; k < 50; ++k) {
    for (Family fam : {Family::Gompertz, Family::InverseGaussian}) {
      double a = ua(rng);
      if (std::fabs(a) < 0.05) a = 0.05;
      const MOLaw law = mo(fam, a, ub(rng), ul(rng));
      const double t = ut(rng);
      const double h = 1e-5 * t;
      const double s1 = std::exp(mo_logsurv(t - h, law)), s2 = std::exp(mo_logsurv(t + h, law));
      const double f = std::exp(mo_logpdf(t, law));
      if (f < 1e-200) continue;
      CHECK((s1 - s2) / (2.0 * h) == doctest::Approx(f).epsilon(1e-6));
    }
  }
}

TEST_CASE("quantile") {
  CHECK(quantile(0.5, BaseLaw{Family::Gompertz, 1.0, 1.0}) == doctest::Approx(0.52658903413904448189).epsilon(1e-12));
  const MOLaw law = mo(Family::Gompertz, -1.2, 0.33, 2.0);
  const double t = quantile(0.1, law);  // p = 0.863 here
  CHECK(std::exp(mo_logsurv(t, law)) == doctest::Approx(0.9).epsilon(1e-10));
  const double tiny = quantile(1e-12, law);
  CHECK(tiny > 0.0);
  CHECK(tiny < 1e-9);
  const double p = cure_fraction(law).p;
  CHECK_THROWS_AS(quantile(1.0 - p, law), std::invalid_argument);
  CHECK_THROWS_AS(quantile(0.0, law), std::invalid_argument);
  // close to the plateau the root is far out but still found
  const double u = (1.0 - p) * (1.0 - 1e-9);
  const double far = quantile(u, law);
  CHECK(-std::expm1(mo_logsurv(far, law)) == doctest::Approx(u).epsilon(1e-9));
}

TEST_CASE("alpha clamp") {
  CHECK(detail::clamp_alpha(0.0) == kAlphaClamp);
  CHECK(detail::clamp_alpha(-1e-12) == -kAlphaClamp);
  CHECK(detail::clamp_alpha(0.5) == 0.5);
}
