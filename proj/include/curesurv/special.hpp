#pragma once

#include <span>

namespace curesurv {

/// Standard normal CDF. Saturates to exactly 0 or 1 far in the tails.
double std_normal_cdf(double x) noexcept;

/// log Phi(x), accurate in both tails (no underflow for very negative x).
double log_std_normal_cdf(double x) noexcept;

/// Inverse of the standard normal CDF, p in (0, 1).
double std_normal_quantile(double p);

/// log(1 - exp(x)) for x < 0. Throws std::domain_error for x >= 0.
double log1mexp(double x);

/// log(1 + exp(x)).
double log1pexp(double x) noexcept;

/// log(sum(exp(xs))); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> xs) noexcept;

/// Fixed-order pairwise (tree) summation. The result depends only on the
/// input order, never on how the terms were produced.
double pairwise_sum(std::span<const double> xs) noexcept;

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

/// Upper tail P(X > x) of a chi-square law with df degrees of freedom.
double chi2_upper_tail(double x, double df);

namespace detail {

// Same as log1mexp but returns -inf at x == 0 and NaN for x > 0.
double log1mexp_unchecked(double x) noexcept;

}  // namespace detail

}  // namespace curesurv
