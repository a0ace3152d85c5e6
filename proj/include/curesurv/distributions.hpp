#pragma once

#include <stdexcept>
#include <string>

namespace curesurv {

enum class Family { Gompertz, InverseGaussian };

/// Gompertz or inverse Gaussian law in (alpha, beta). The law is defective
/// (mass below one) when alpha < 0.
struct BaseLaw {
  Family family = Family::Gompertz;
  double alpha = 1.0;
  double beta = 1.0;
};

/// Marshall-Olkin extension S -> lambda S / (1 - (1 - lambda) S).
struct MOLaw {
  BaseLaw base;
  double lambda = 1.0;
};

/// Limiting survival p and the base-law limit p0 (equal for non-MO laws).
struct CureFraction {
  double p = 0.0;
  double p0 = 0.0;
};

/// Raised when an iterative routine exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |alpha| below this is moved to +/- this value before evaluation.
inline constexpr double kAlphaClamp = 1e-8;

double gompertz_logpdf(double t, double alpha, double beta);
double gompertz_logsurv(double t, double alpha, double beta);
double invgauss_logpdf(double t, double alpha, double beta);
double invgauss_logsurv(double t, double alpha, double beta);

double base_logpdf(double t, const BaseLaw& law);
double base_logsurv(double t, const BaseLaw& law);

double mo_logsurv(double t, const MOLaw& law);
double mo_logpdf(double t, const MOLaw& law);

CureFraction cure_fraction(const BaseLaw& law);
CureFraction cure_fraction(const MOLaw& law);

/// Root of F(t) = u with F = 1 - S. Requires 0 < u < 1 - p.
/// Brent-style bracketed search; throws ConvergenceError after 200 iterations.
double quantile(double u, const BaseLaw& law);
double quantile(double u, const MOLaw& law);

/// Throws std::invalid_argument when beta <= 0, alpha == 0 or a value is
/// not finite.
void validate(const BaseLaw& law);
void validate(const MOLaw& law);

std::string family_name(Family family);

namespace detail {

// Kernels without argument checks; non-finite results signal invalid input.
double gompertz_logsurv(double t, double alpha, double beta) noexcept;
double invgauss_logsurv(double t, double alpha, double beta) noexcept;
double gompertz_logpdf_from_logsurv(double t, double alpha, double beta,
                                    double log_surv) noexcept;
double invgauss_logpdf(double t, double alpha, double beta) noexcept;

// log(1 - (1 - lambda) S) given log S.
double mo_log_denominator(double log_surv, double lambda, double log_lambda) noexcept;

double clamp_alpha(double alpha) noexcept;

}  // namespace detail

}  // namespace curesurv
