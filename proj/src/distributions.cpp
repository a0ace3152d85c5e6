#include "curesurv/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "curesurv/special.hpp"

namespace curesurv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;

void require_positive_time(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument(std::string(who) + ": t must be positive and finite");
}

void require_nonnegative_time(double t, const char* who) {
  if (!(t >= 0.0) || std::isnan(t))
    throw std::invalid_argument(std::string(who) + ": t must be non-negative");
}

void require_params(double alpha, double beta, const char* who) {
  if (!std::isfinite(alpha) || alpha == 0.0)
    throw std::invalid_argument(std::string(who) + ": alpha must be finite and non-zero");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument(std::string(who) + ": beta must be positive");
}

// F(t) - u evaluated as -expm1(log S) - u to keep precision for small u.
template <class LogSurv>
double cdf_minus(const LogSurv& logsurv, double t, double u) {
  return -std::expm1(logsurv(t)) - u;
}

template <class LogSurv>
double solve_quantile(const LogSurv& logsurv, double u) {
  constexpr int kMaxIter = 200;
  double lo = 1e-12;
  double glo = cdf_minus(logsurv, lo, u);
  if (glo > 0.0) {
    lo = 0.0;
    glo = -u;
  }
  if (glo == 0.0) return lo;

  double hi = 1.0;
  double ghi = cdf_minus(logsurv, hi, u);
  for (int k = 0; !(ghi > 0.0); ++k) {
    if (k > 1100 || !std::isfinite(hi)) throw ConvergenceError("quantile: could not bracket the root");
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    ghi = cdf_minus(logsurv, hi, u);
  }
  if (glo == 0.0) return lo;

  // Bisection with a secant proposal whenever it lands strictly inside the
  // bracket and the bracket keeps shrinking fast enough.
  double width_before = hi - lo;
  for (int it = 0; it < kMaxIter; ++it) {
    double t = lo - glo * (hi - lo) / (ghi - glo);
    if (!(t > lo && t < hi) || (it % 3 == 2 && hi - lo > 0.5 * width_before)) t = 0.5 * (lo + hi);
    if (it % 3 == 2) width_before = hi - lo;
    const double g = cdf_minus(logsurv, t, u);
    if (std::fabs(g) <= 1e-14 || g == 0.0) return t;
    if (g < 0.0) {
      lo = t;
      glo = g;
    } else {
      hi = t;
      ghi = g;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      const double best = std::fabs(glo) < std::fabs(ghi) ? lo : hi;
      if (std::fabs(cdf_minus(logsurv, best, u)) <= 1e-10) return best;
      throw ConvergenceError("quantile: bracket collapsed without meeting the tolerance");
    }
  }
  const double best = std::fabs(glo) < std::fabs(ghi) ? lo : hi;
  if (std::fabs(cdf_minus(logsurv, best, u)) <= 1e-10) return best;
  throw ConvergenceError("quantile: iteration cap reached");
}

}  // namespace

namespace detail {

double clamp_alpha(double alpha) noexcept {
  if (std::fabs(alpha) >= kAlphaClamp) return alpha;
  return alpha < 0.0 ? -kAlphaClamp : kAlphaClamp;
}

double gompertz_logsurv(double t, double alpha, double beta) noexcept {
  if (t == 0.0) return 0.0;
  return -(beta / alpha) * std::expm1(alpha * t);
}

double gompertz_logpdf_from_logsurv(double t, double alpha, double beta,
                                    double log_surv) noexcept {
  return std::log(beta) + alpha * t + log_surv;
}

double invgauss_logsurv(double t, double alpha, double beta) noexcept {
  if (t == 0.0) return 0.0;
  const double s = std::sqrt(beta * t);
  const double log_a = log_std_normal_cdf((1.0 - alpha * t) / s);
  const double log_b = 2.0 * alpha / beta + log_std_normal_cdf(-(alpha * t + 1.0) / s);
  if (std::isnan(log_a) || std::isnan(log_b)) return std::numeric_limits<double>::quiet_NaN();
  if (log_b >= log_a) return kNegInf;  // cancellation ate everything
  return log_a + log1mexp_unchecked(log_b - log_a);
}

double invgauss_logpdf(double t, double alpha, double beta) noexcept {
  const double r = 1.0 - alpha * t;
  // log(beta t^3) split so tiny t does not underflow to log(0)
  return -kHalfLog2Pi - 0.5 * (std::log(beta) + 3.0 * std::log(t)) - r * r / (2.0 * beta * t);
}

double mo_log_denominator(double log_surv, double lambda, double /*log_lambda*/) noexcept {
  if (lambda == 1.0) return 0.0;
  if (lambda > 1.0) return std::log1p((lambda - 1.0) * std::exp(log_surv));
  return log1mexp_unchecked(std::log1p(-lambda) + log_surv);
}

}  // namespace detail

void validate(const BaseLaw& law) { require_params(law.alpha, law.beta, "BaseLaw"); }

void validate(const MOLaw& law) {
  validate(law.base);
  if (!(law.lambda > 0.0) || !std::isfinite(law.lambda))
    throw std::invalid_argument("MOLaw: lambda must be positive");
}

double gompertz_logpdf(double t, double alpha, double beta) {
  require_positive_time(t, "gompertz_logpdf");
  require_params(alpha, beta, "gompertz_logpdf");
  return detail::gompertz_logpdf_from_logsurv(t, alpha, beta,
                                              detail::gompertz_logsurv(t, alpha, beta));
}

double gompertz_logsurv(double t, double alpha, double beta) {
  require_nonnegative_time(t, "gompertz_logsurv");
  require_params(alpha, beta, "gompertz_logsurv");
  return detail::gompertz_logsurv(t, alpha, beta);
}

double invgauss_logpdf(double t, double alpha, double beta) {
  require_positive_time(t, "invgauss_logpdf");
  require_params(alpha, beta, "invgauss_logpdf");
  return detail::invgauss_logpdf(t, alpha, beta);
}

double invgauss_logsurv(double t, double alpha, double beta) {
  require_nonnegative_time(t, "invgauss_logsurv");
  require_params(alpha, beta, "invgauss_logsurv");
  if (std::isinf(t)) return std::log(cure_fraction(BaseLaw{Family::InverseGaussian, alpha, beta}).p0);
  return detail::invgauss_logsurv(t, alpha, beta);
}

double base_logpdf(double t, const BaseLaw& law) {
  return law.family == Family::Gompertz ? gompertz_logpdf(t, law.alpha, law.beta)
                                        : invgauss_logpdf(t, law.alpha, law.beta);
}

double base_logsurv(double t, const BaseLaw& law) {
  return law.family == Family::Gompertz ? gompertz_logsurv(t, law.alpha, law.beta)
                                        : invgauss_logsurv(t, law.alpha, law.beta);
}

double mo_logsurv(double t, const MOLaw& law) {
  validate(law);
  const double log_s = base_logsurv(t, law.base);
  if (law.lambda == 1.0 || log_s == 0.0) return log_s;
  const double log_lambda = std::log(law.lambda);
  // S <= 1 must survive the rounding of log(lambda) - log(denominator)
  return std::min(0.0, log_lambda + log_s - detail::mo_log_denominator(log_s, law.lambda, log_lambda));
}

double mo_logpdf(double t, const MOLaw& law) {
  validate(law);
  const double log_f = base_logpdf(t, law.base);
  if (law.lambda == 1.0) return log_f;
  const double log_s = base_logsurv(t, law.base);
  const double log_lambda = std::log(law.lambda);
  return log_lambda + log_f - 2.0 * detail::mo_log_denominator(log_s, law.lambda, log_lambda);
}

CureFraction cure_fraction(const BaseLaw& law) {
  validate(law);
  if (law.alpha > 0.0) return {0.0, 0.0};
  const double p0 = law.family == Family::Gompertz ? std::exp(law.beta / law.alpha)
                                                   : -std::expm1(2.0 * law.alpha / law.beta);
  return {p0, p0};
}

CureFraction cure_fraction(const MOLaw& law) {
  validate(law);
  const double p0 = cure_fraction(law.base).p0;
  if (law.lambda == 1.0) return {p0, p0};
  return {law.lambda * p0 / (1.0 - (1.0 - law.lambda) * p0), p0};
}

double quantile(double u, const BaseLaw& law) {
  return quantile(u, MOLaw{law, 1.0});
}

double quantile(double u, const MOLaw& law) {
  validate(law);
  const double p = cure_fraction(law).p;
  if (!(u > 0.0) || !(u < 1.0 - p))
    throw std::invalid_argument("quantile: u must lie in (0, 1 - p)");
  return solve_quantile([&law](double t) { return mo_logsurv(t, law); }, u);
}

std::string family_name(Family family) {
  return family == Family::Gompertz ? "gompertz" : "inverse-gaussian";
}

}  // namespace curesurv
