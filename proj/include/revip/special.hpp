#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace revip {

/// Window used for probabilities that feed the normal quantile.
inline constexpr double kProbFloor = 1e-15;
inline constexpr double kProbCeil = 1.0 - 1e-15;

inline double normal_cdf(double z) {
  return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2);
}

/// Normal quantile with the argument clamped to [kProbFloor, kProbCeil].
/// `clamped` is set when the input fell outside the window.
inline double normal_quantile(double u, bool* clamped = nullptr) {
  const double c = std::clamp(u, kProbFloor, kProbCeil);
  if (clamped != nullptr) *clamped = (c != u);
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * c);
}

/// Upper tail of the chi-square law, P(chi2_dof > x).
inline double chi2_survival(double x, double dof) {
  if (dof <= 0.0) return 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

/// Limiting Kolmogorov distribution, P(K > t).
inline double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sided exact binomial test p-value for k successes in n trials at 1/2.
inline double binomial_half_two_sided(std::size_t k, std::size_t n) {
  if (n == 0) return 1.0;
  const std::size_t lo = std::min(k, n - k);
  // P(X <= lo) for X ~ Bin(n, 1/2), via the regularized incomplete beta.
  const double tail = lo >= n ? 1.0
                              : boost::math::ibeta(static_cast<double>(n - lo),
                                                   static_cast<double>(lo + 1), 0.5);
  return std::min(1.0, 2.0 * tail);
}

/// Integral of exp(log_integrand(t)) over t in (lo, hi); either end may be infinite.
/// Adaptive Gauss-Kronrod (61 points per panel).
template <class LogIntegrand>
double integrate_exp(LogIntegrand&& log_integrand, double lo, double hi, double rel_tol = 1e-13,
                     double* error_estimate = nullptr) {
  auto f = [&](double t) {
    const double l = log_integrand(t);
    return l < -745.0 ? 0.0 : std::exp(l);
  };
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, rel_tol, &err);
  if (!std::isfinite(value)) throw std::runtime_error("quadrature produced a non-finite value");
  if (error_estimate != nullptr) *error_estimate = err;
  return value;
}

}  // namespace revip
