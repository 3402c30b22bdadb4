#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "revip/involutions.hpp"
#include "revip/special.hpp"

namespace revip {

/// Family of distribution functions F_x(y), continuous and strictly increasing
/// in y on (a, b).
struct CdfFamily {
  std::string name;
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
  std::function<double(double x, double y)> cdf;
  /// Closed-form inverse in y, when known.
  std::function<double(double x, double u)> quantile;
  /// False when the kernel is not known to be reversible; the involution
  /// property is then not expected.
  bool reversible = true;
};

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// s in (0,1) onto (a, b).
inline double from_unit(double a, double b, double s) {
  const bool a_inf = std::isinf(a);
  const bool b_inf = std::isinf(b);
  if (a_inf && b_inf) return std::tan(std::numbers::pi * (s - 0.5));
  if (b_inf) return a + s / (1.0 - s);
  if (a_inf) return b - (1.0 - s) / s;
  return a + s * (b - a);
}

}  // namespace detail

/// Numeric inverse of F_x by bisection in the compactified coordinate; runs
/// until the bracket collapses, at most 200 halvings.
inline double numeric_quantile(const CdfFamily& fam, double x, double u) {
  double lo = 0.0;
  double hi = 1.0;
  const double f_lo = fam.cdf(x, detail::from_unit(fam.a, fam.b, std::nextafter(0.0, 1.0)));
  const double f_hi = fam.cdf(x, detail::from_unit(fam.a, fam.b, std::nextafter(1.0, 0.0)));
  if (!(f_lo <= u && u <= f_hi)) {
    throw BracketError(fam.name + ": u=" + to_text(u) + " not bracketed at x=" + to_text(x));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double y = detail::from_unit(fam.a, fam.b, mid);
    if (fam.cdf(x, y) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double y_lo = detail::from_unit(fam.a, fam.b, lo);
  const double y_hi = detail::from_unit(fam.a, fam.b, hi);
  return std::abs(fam.cdf(x, y_lo) - u) < std::abs(fam.cdf(x, y_hi) - u) ? y_lo : y_hi;
}

/// f(x, u) = F_x^{-1}(u).
inline double skorokhod_f(const CdfFamily& fam, double x, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("skorokhod_f: u must lie in (0,1)");
  if (fam.quantile) return fam.quantile(x, u);
  return numeric_quantile(fam, x, u);
}

/// g(x, u) = F_{f(x,u)}(x).
inline double rosenblatt_g(const CdfFamily& fam, double x, double u) {
  return fam.cdf(skorokhod_f(fam, x, u), x);
}

inline Space interval_space(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return {SpaceKind::RealLine};
  if (a == 0.0 && std::isinf(b)) return {SpaceKind::PositiveReal};
  if (a == 0.0 && b == 1.0) return {SpaceKind::UnitInterval};
  throw std::invalid_argument("interval_space: only (-inf,inf), (0,inf) and (0,1) are supported");
}

inline Involution<double, double> build_involution(const CdfFamily& fam) {
  Involution<double, double> h;
  h.name = "skorokhod:" + fam.name;
  h.x_space = interval_space(fam.a, fam.b);
  h.u_space = {SpaceKind::UnitInterval};
  h.params["reversible"] = fam.reversible ? 1.0 : 0.0;
  h.f = [fam](double x, double u) { return skorokhod_f(fam, x, u); };
  h.g = [fam](double x, double u) { return rosenblatt_g(fam, x, u); };
  return h;
}

/// Strict increase of F_x on a grid of `points` interior points of (a, b).
inline bool is_strictly_increasing(const CdfFamily& fam, double x, std::size_t points = 1000) {
  double prev = -1.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double s = 0.05 + 0.9 * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    const double v = fam.cdf(x, detail::from_unit(fam.a, fam.b, s));
    if (!(v > prev)) return false;
    prev = v;
  }
  return true;
}

/// F_x(y) = Phi((y - beta x) / sigma). The numeric path is used unless
/// `closed_form` is set.
inline CdfFamily gaussian_family(double beta, double sigma, bool closed_form = false) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_family: sigma must be positive");
  CdfFamily fam;
  fam.name = "gaussian(beta=" + to_text(beta) + ",sigma=" + to_text(sigma) + ")";
  fam.cdf = [beta, sigma](double x, double y) { return normal_cdf((y - beta * x) / sigma); };
  if (closed_form) {
    fam.quantile = [beta, sigma](double x, double u) { return beta * x + sigma * normal_quantile(u); };
  }
  fam.reversible = std::abs(beta) < 1.0;
  return fam;
}

/// F_x(y) = y on (0,1) for every x.
inline CdfFamily uniform_family() {
  CdfFamily fam;
  fam.name = "uniform";
  fam.a = 0.0;
  fam.b = 1.0;
  fam.cdf = [](double, double y) { return std::clamp(y, 0.0, 1.0); };
  return fam;
}

}  // namespace revip
