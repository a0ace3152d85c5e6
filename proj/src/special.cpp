#include "curesurv/special.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace curesurv {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log Phi(x) for x << 0 via the asymptotic Mills-ratio series.
double log_phi_lower_tail(double x) noexcept {
  const double z = 1.0 / (x * x);
  // 1 - z + 3z^2 - 15z^3 + 105z^4 - 945z^5; x < -37 keeps z tiny.
  const double series = 1.0 + z * (-1.0 + z * (3.0 + z * (-15.0 + z * (105.0 - 945.0 * z))));
  return -0.5 * x * x - std::log(-x) - kHalfLog2Pi + std::log(series);
}

}  // namespace

double std_normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double log_std_normal_cdf(double x) noexcept {
  if (std::isnan(x)) return x;
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x >= -37.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  if (x == -std::numeric_limits<double>::infinity()) return kNegInf;
  return log_phi_lower_tail(x);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

namespace detail {

double log1mexp_unchecked(double x) noexcept {
  if (x > 0.0 || std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return kNegInf;
  // Maechler's switch point: expm1 near 0, log1p further out.
  return x > -kLn2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

}  // namespace detail

double log1mexp(double x) {
  if (!(x < 0.0)) throw std::domain_error("log1mexp: argument must be negative");
  return detail::log1mexp_unchecked(x);
}

double log1pexp(double x) noexcept {
  if (x <= -37.0) return std::exp(x);
  if (x <= 18.0) return std::log1p(std::exp(x));
  if (x <= 33.3) return x + std::exp(-x);
  return x;
}

double log_sum_exp(std::span<const double> xs) noexcept {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (std::isnan(m)) return m;
  if (!std::isfinite(m)) return m;  // all -inf -> -inf, any +inf -> +inf
  double acc = 0.0;
  for (double v : xs) acc += std::exp(v - m);
  return m + std::log(acc);
}

double pairwise_sum(std::span<const double> xs) noexcept {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : xs) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("regularized_gamma_q: need a > 0, x >= 0");
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

double chi2_upper_tail(double x, double df) {
  if (!(df > 0.0)) throw std::domain_error("chi2_upper_tail: df must be positive");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace curesurv
