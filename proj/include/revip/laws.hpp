#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "revip/rng.hpp"
#include "revip/special.hpp"

namespace revip {

// ---------------------------------------------------------------------------
// Law kinds. Each is a plain parameter record; construction goes through the
// `Law` factories, which validate ranges and precompute constants.
// ---------------------------------------------------------------------------

struct GammaLaw {
  double shape;
  double rate;
};

/// Density proportional to x^{-alpha-1} exp(-lambda (x + 1/x)) on (0, inf).
struct GigLaw {
  double alpha;
  double lambda;
  double log_norm_const;  // log C(alpha, lambda)
  double mode;
  double rou_vmin;  // ratio-of-uniforms box (u in (0,1], v in [vmin, vmax])
  double rou_vmax;
};

struct BetaLaw {
  double a;
  double b;
};

struct BernoulliLaw {
  double p;
};

struct UniformUnitLaw {};

struct NormalLaw {
  double mean;
  double variance;
};

/// geo(theta) on {0,1,2,...}: pmf (1-theta) theta^k.
struct GeometricLaw {
  double theta;
};

/// theta^x / Z on {-ell..ell}.
struct TruncGeomLaw {
  double theta;
  std::int64_t ell;
  double norm;  // Z(theta, -ell, ell)
};

/// theta^u / Z on {-ell, -ell+1, ...}.
struct ShiftGeomLaw {
  double theta;
  std::int64_t ell;
};

/// U on {-1,0,1}: P(1)=p, P(-1)=q, P(0)=r.
struct ThreePointLaw {
  double p;
  double q;
  double r;
};

/// P(X odd) = podd, and X restricted to each parity class is geometric with
/// failure rate rho^2 in the half-index.
struct ParityGeomLaw {
  double rho;
  double podd;
};

struct FiniteTableLaw {
  std::vector<double> values;  // strictly increasing
  std::vector<double> probs;
};

using LawVariant = std::variant<GammaLaw, GigLaw, BetaLaw, BernoulliLaw, UniformUnitLaw, NormalLaw,
                                GeometricLaw, TruncGeomLaw, ShiftGeomLaw, ThreePointLaw, ParityGeomLaw,
                                FiniteTableLaw>;

double gig_norm_const(double alpha, double lambda);

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

// log of the t-integrand for x = e^t: x^{-alpha} e^{-lambda (x + 1/x)}
inline double gig_log_t_integrand(double alpha, double lambda, double t) {
  return -alpha * t - lambda * (std::exp(t) + std::exp(-t));
}

// Maximizer of the t-integrand: lambda (e^t - e^{-t}) = -alpha.
inline double gig_t_peak(double alpha, double lambda) {
  return std::asinh(-alpha / (2.0 * lambda));
}

inline double gig_log_unnormalized(const GigLaw& g, double x) {
  return -(g.alpha + 1.0) * std::log(x) - g.lambda * (x + 1.0 / x);
}

// Integral of the unnormalized density over (e^lo, e^hi), scaled by exp(-shift).
inline double gig_partial_integral(double alpha, double lambda, double lo, double hi, double shift) {
  return integrate_exp(
      [&](double t) { return gig_log_t_integrand(alpha, lambda, t) - shift; }, lo, hi);
}

// Maximize phi over (lo, hi) given on a log-spaced scan followed by golden section.
template <class Phi>
double maximize_on_log_grid(Phi&& phi, double lo, double hi) {
  const int grid = 400;
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double x = std::exp(llo + (lhi - llo) * i / grid);
    const double v = phi(x);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = llo + (lhi - llo) * std::max(0, best - 1) / grid;
  double b = llo + (lhi - llo) * std::min(grid, best + 1) / grid;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    const double c = b - ratio * (b - a);
    const double d = a + ratio * (b - a);
    if (phi(std::exp(c)) >= phi(std::exp(d))) {
      b = d;
    } else {
      a = c;
    }
  }
  return std::max(best_val, phi(std::exp(0.5 * (a + b))));
}

inline GigLaw make_gig(double alpha, double lambda) {
  GigLaw g{alpha, lambda, 0.0, 0.0, 0.0, 0.0};
  g.log_norm_const = std::log(gig_norm_const(alpha, lambda));
  g.mode = (-(alpha + 1.0) + std::sqrt((alpha + 1.0) * (alpha + 1.0) + 4.0 * lambda * lambda)) /
           (2.0 * lambda);
  const double lh_mode = gig_log_unnormalized(g, g.mode);
  auto half_log_h = [&](double x) { return 0.5 * (gig_log_unnormalized(g, x) - lh_mode); };
  const double m = g.mode;
  const double right = detail::maximize_on_log_grid(
      [&](double d) { return std::log(d) + half_log_h(m + d); }, 1e-10 * (1.0 + m), 1e6 * (1.0 + m));
  const double left = detail::maximize_on_log_grid(
      [&](double d) { return std::log(d) + half_log_h(m - d); }, 1e-12 * m, m * (1.0 - 1e-12));
  // Slight inflation keeps the box a superset of the acceptance region.
  g.rou_vmax = std::exp(right) * (1.0 + 1e-7);
  g.rou_vmin = -std::exp(left) * (1.0 + 1e-7);
  return g;
}

inline double sample_gamma(double shape, double rate, Stream& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = 0.0;
    double v = 0.0;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v / rate;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

inline double trunc_geom_norm(double theta, std::int64_t ell) {
  double z = 0.0;
  for (std::int64_t i = -ell; i <= ell; ++i) z += std::pow(theta, static_cast<double>(i));
  return z;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

/// Normalizing constant C(alpha, lambda) of the GIG density x^{-alpha-1} e^{-lambda(x+1/x)}.
/// Computed by adaptive Gauss-Kronrod quadrature after the substitution x = e^t.
inline double gig_norm_const(double alpha, double lambda) {
  detail::require(alpha > 0.0 && lambda > 0.0, "gig_norm_const: alpha and lambda must be positive");
  const double peak = detail::gig_t_peak(alpha, lambda);
  const double shift = detail::gig_log_t_integrand(alpha, lambda, peak);
  double err = 0.0;
  const double scaled = integrate_exp(
      [&](double t) { return detail::gig_log_t_integrand(alpha, lambda, t) - shift; },
      -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 1e-14,
      &err);
  if (!(scaled > 0.0) || err > 1e-10 * scaled) {
    throw std::runtime_error("gig_norm_const: quadrature did not converge");
  }
  return std::exp(-shift) / scaled;
}

class Law {
 public:
  static Law gamma(double shape, double rate) {
    detail::require(shape > 0.0 && rate > 0.0, "Gamma: shape and rate must be positive");
    return Law(GammaLaw{shape, rate});
  }
  static Law gig(double alpha, double lambda) {
    detail::require(alpha > 0.0 && lambda > 0.0, "GIG: alpha and lambda must be positive");
    return Law(detail::make_gig(alpha, lambda));
  }
  static Law beta(double a, double b) {
    detail::require(a > 0.0 && b > 0.0, "BetaI: a and b must be positive");
    return Law(BetaLaw{a, b});
  }
  static Law bernoulli(double p) {
    detail::require(p >= 0.0 && p <= 1.0, "Bernoulli: p must lie in [0,1]");
    return Law(BernoulliLaw{p});
  }
  static Law uniform_unit() { return Law(UniformUnitLaw{}); }
  static Law normal(double mean, double variance) {
    detail::require(std::isfinite(mean) && variance > 0.0, "Normal: variance must be positive");
    return Law(NormalLaw{mean, variance});
  }
  static Law geometric(double theta) {
    detail::require(theta > 0.0 && theta < 1.0, "Geometric: theta must lie in (0,1)");
    return Law(GeometricLaw{theta});
  }
  static Law trunc_geom(double theta, std::int64_t ell) {
    detail::require(theta > 0.0 && theta < 1.0, "TruncGeom: theta must lie in (0,1)");
    detail::require(ell > 0 && ell % 2 == 0, "TruncGeom: ell must be a positive even integer");
    return Law(TruncGeomLaw{theta, ell, detail::trunc_geom_norm(theta, ell)});
  }
  static Law shift_geom(double theta, std::int64_t ell) {
    detail::require(theta > 0.0 && theta < 1.0, "ShiftGeom: theta must lie in (0,1)");
    detail::require(ell > 0 && ell % 2 == 0, "ShiftGeom: ell must be a positive even integer");
    return Law(ShiftGeomLaw{theta, ell});
  }
  static Law three_point(double p, double q, double r) {
    detail::require(p >= 0.0 && q >= 0.0 && r >= 0.0, "ThreePoint: weights must be nonnegative");
    detail::require(std::abs(p + q + r - 1.0) <= 1e-12, "ThreePoint: weights must sum to 1");
    return Law(ThreePointLaw{p, q, r});
  }
  static Law parity_geom(double rho, double podd) {
    detail::require(rho > 0.0 && rho < 1.0, "ParityGeom: rho must lie in (0,1)");
    detail::require(podd > 0.0 && podd < 1.0, "ParityGeom: podd must lie in (0,1)");
    return Law(ParityGeomLaw{rho, podd});
  }
  static Law finite_table(std::vector<double> values, std::vector<double> probs) {
    detail::require(!values.empty() && values.size() == probs.size(),
                    "FiniteTable: values and probs must be nonempty and of equal length");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
    FiniteTableLaw t;
    double total = 0.0;
    for (auto i : order) {
      detail::require(std::isfinite(values[i]), "FiniteTable: values must be finite");
      detail::require(probs[i] >= 0.0, "FiniteTable: probabilities must be nonnegative");
      detail::require(t.values.empty() || values[i] > t.values.back(),
                      "FiniteTable: duplicate support value");
      t.values.push_back(values[i]);
      t.probs.push_back(probs[i]);
      total += probs[i];
    }
    detail::require(std::abs(total - 1.0) <= 1e-12, "FiniteTable: probabilities must sum to 1");
    return Law(std::move(t));
  }

  [[nodiscard]] const LawVariant& variant() const noexcept { return v_; }

  [[nodiscard]] bool discrete() const noexcept {
    return !(std::holds_alternative<GammaLaw>(v_) || std::holds_alternative<GigLaw>(v_) ||
             std::holds_alternative<BetaLaw>(v_) || std::holds_alternative<UniformUnitLaw>(v_) ||
             std::holds_alternative<NormalLaw>(v_));
  }
  [[nodiscard]] bool integer_valued() const;

  [[nodiscard]] std::string name() const;
  [[nodiscard]] std::string kind() const;
  [[nodiscard]] std::map<std::string, double> params() const;

 private:
  explicit Law(LawVariant v) : v_(std::move(v)) {}
  LawVariant v_;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// pdf for continuous kinds, pmf for discrete kinds; zero outside the support.
inline double density(const Law& law, double x) {
  if (law.discrete() && !detail::is_integer(x)) {
    throw std::invalid_argument("density: discrete law " + law.name() +
                                " evaluated at a non-integer value");
  }
  using detail::overloaded;
  return std::visit(
      overloaded{
          [&](const GammaLaw& g) {
            if (x <= 0.0) return 0.0;
            return std::exp(g.shape * std::log(g.rate) - std::lgamma(g.shape) +
                            (g.shape - 1.0) * std::log(x) - g.rate * x);
          },
          [&](const GigLaw& g) {
            if (x <= 0.0) return 0.0;
            return std::exp(g.log_norm_const + detail::gig_log_unnormalized(g, x));
          },
          [&](const BetaLaw& b) {
            if (x <= 0.0 || x >= 1.0) return 0.0;
            return boost::math::ibeta_derivative(b.a, b.b, x);
          },
          [&](const BernoulliLaw& b) {
            if (x == 1.0) return b.p;
            if (x == 0.0) return 1.0 - b.p;
            return 0.0;
          },
          [&](const UniformUnitLaw&) { return (x > 0.0 && x < 1.0) ? 1.0 : 0.0; },
          [&](const NormalLaw& n) {
            const double z = (x - n.mean) / std::sqrt(n.variance);
            return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * n.variance);
          },
          [&](const GeometricLaw& g) {
            if (x < 0.0) return 0.0;
            return (1.0 - g.theta) * std::pow(g.theta, x);
          },
          [&](const TruncGeomLaw& g) {
            if (std::abs(x) > static_cast<double>(g.ell)) return 0.0;
            return std::pow(g.theta, x) / g.norm;
          },
          [&](const ShiftGeomLaw& g) {
            const double k = x + static_cast<double>(g.ell);
            if (k < 0.0) return 0.0;
            return (1.0 - g.theta) * std::pow(g.theta, k);
          },
          [&](const ThreePointLaw& t) {
            if (x == 1.0) return t.p;
            if (x == 0.0) return t.r;
            if (x == -1.0) return t.q;
            return 0.0;
          },
          [&](const ParityGeomLaw& g) {
            if (x < 0.0) return 0.0;
            const auto k = static_cast<std::int64_t>(x);
            const double rho2 = g.rho * g.rho;
            const double base = (1.0 - rho2) * std::pow(rho2, static_cast<double>(k / 2));
            return (k % 2 == 1 ? g.podd : 1.0 - g.podd) * base;
          },
          [&](const FiniteTableLaw& t) {
            auto it = std::lower_bound(t.values.begin(), t.values.end(), x);
            if (it == t.values.end() || *it != x) return 0.0;
            return t.probs[static_cast<std::size_t>(it - t.values.begin())];
          },
      },
      law.variant());
}

/// Upper tail P(X > x), evaluated without cancellation for the geometric families.
inline double survival(const Law& law, double x);

/// P(X <= x).
inline double cdf(const Law& law, double x) {
  using detail::overloaded;
  return std::visit(
      overloaded{
          [&](const GammaLaw& g) { return x <= 0.0 ? 0.0 : boost::math::gamma_p(g.shape, g.rate * x); },
          [&](const GigLaw& g) {
            if (x <= 0.0) return 0.0;
            if (x > g.mode) return 1.0 - survival(law, x);
            const double t = std::log(x);
            const double shift = detail::gig_log_t_integrand(g.alpha, g.lambda, t);
            const double part = detail::gig_partial_integral(
                g.alpha, g.lambda, -std::numeric_limits<double>::infinity(), t, shift);
            return std::clamp(std::exp(g.log_norm_const + shift) * part, 0.0, 1.0);
          },
          [&](const BetaLaw& b) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return boost::math::ibeta(b.a, b.b, x);
          },
          [&](const UniformUnitLaw&) { return std::clamp(x, 0.0, 1.0); },
          [&](const NormalLaw& n) { return normal_cdf((x - n.mean) / std::sqrt(n.variance)); },
          [&](const auto&) { return 1.0 - survival(law, x); },
      },
      law.variant());
}

inline double survival(const Law& law, double x) {
  using detail::overloaded;
  return std::visit(
      overloaded{
          [&](const GammaLaw& g) { return x <= 0.0 ? 1.0 : boost::math::gamma_q(g.shape, g.rate * x); },
          [&](const GigLaw& g) {
            if (x <= 0.0) return 1.0;
            if (x <= g.mode) return 1.0 - cdf(law, x);
            const double t = std::log(x);
            const double shift = detail::gig_log_t_integrand(g.alpha, g.lambda, t);
            const double part = detail::gig_partial_integral(
                g.alpha, g.lambda, t, std::numeric_limits<double>::infinity(), shift);
            return std::clamp(std::exp(g.log_norm_const + shift) * part, 0.0, 1.0);
          },
          [&](const BetaLaw& b) {
            if (x <= 0.0) return 1.0;
            if (x >= 1.0) return 0.0;
            return boost::math::ibetac(b.a, b.b, x);
          },
          [&](const BernoulliLaw& b) {
            if (x < 0.0) return 1.0;
            if (x < 1.0) return b.p;
            return 0.0;
          },
          [&](const UniformUnitLaw&) { return 1.0 - std::clamp(x, 0.0, 1.0); },
          [&](const NormalLaw& n) { return normal_cdf(-(x - n.mean) / std::sqrt(n.variance)); },
          [&](const GeometricLaw& g) {
            if (x < 0.0) return 1.0;
            return std::pow(g.theta, std::floor(x) + 1.0);
          },
          [&](const TruncGeomLaw& g) {
            const auto ell = static_cast<double>(g.ell);
            if (x < -ell) return 1.0;
            if (x >= ell) return 0.0;
            double s = 0.0;
            for (double k = ell; k > std::floor(x); k -= 1.0) s += std::pow(g.theta, k);
            return s / g.norm;
          },
          [&](const ShiftGeomLaw& g) {
            const double k = std::floor(x) + static_cast<double>(g.ell);
            if (k < 0.0) return 1.0;
            return std::pow(g.theta, k + 1.0);
          },
          [&](const ThreePointLaw& t) {
            if (x < -1.0) return 1.0;
            if (x < 0.0) return t.r + t.p;
            if (x < 1.0) return t.p;
            return 0.0;
          },
          [&](const ParityGeomLaw& g) {
            if (x < 0.0) return 1.0;
            const auto k = static_cast<std::int64_t>(std::floor(x));
            // first even index above k is 2*je, first odd index above k is 2*jo+1
            const std::int64_t je = k / 2 + 1;
            const std::int64_t jo = (k % 2 == 0) ? k / 2 : k / 2 + 1;
            const double rho2 = g.rho * g.rho;
            return (1.0 - g.podd) * std::pow(rho2, static_cast<double>(je)) +
                   g.podd * std::pow(rho2, static_cast<double>(jo));
          },
          [&](const FiniteTableLaw& t) {
            double s = 0.0;
            for (std::size_t i = t.values.size(); i-- > 0 && t.values[i] > x;) s += t.probs[i];
            return s;
          },
      },
      law.variant());
}

namespace detail {

// Smallest integer k with cdf(k) >= u, starting the search at `guess`.
inline double discrete_generalized_inverse(const Law& law, double u, double guess) {
  double k = guess;
  while (cdf(law, k) < u) k += 1.0;
  while (cdf(law, k - 1.0) >= u) k -= 1.0;
  return k;
}

}  // namespace detail

/// Quantile. Continuous kinds are inverted exactly (closed form or bisection);
/// discrete kinds use the generalized inverse inf{x : F(x) >= u}.
inline double quantile(const Law& law, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
  using detail::overloaded;
  return std::visit(
      overloaded{
          [&](const GammaLaw& g) { return boost::math::gamma_p_inv(g.shape, u) / g.rate; },
          [&](const GigLaw& g) {
            // bisection on t = log x
            double lo = std::log(g.mode) - 1.0;
            double hi = std::log(g.mode) + 1.0;
            while (cdf(law, std::exp(lo)) > u) lo -= 2.0;
            while (cdf(law, std::exp(hi)) < u) hi += 2.0;
            for (int it = 0; it < 200; ++it) {
              const double mid = 0.5 * (lo + hi);
              if (mid <= lo || mid >= hi) break;
              (cdf(law, std::exp(mid)) < u ? lo : hi) = mid;
            }
            return std::exp(0.5 * (lo + hi));
          },
          [&](const BetaLaw& b) { return boost::math::ibeta_inv(b.a, b.b, u); },
          [&](const BernoulliLaw& b) { return u <= 1.0 - b.p ? 0.0 : 1.0; },
          [&](const UniformUnitLaw&) { return u; },
          [&](const NormalLaw& n) { return n.mean + std::sqrt(n.variance) * normal_quantile(u); },
          [&](const GeometricLaw& g) {
            const double guess = std::max(0.0, std::ceil(std::log1p(-u) / std::log(g.theta)) - 1.0);
            return detail::discrete_generalized_inverse(law, u, guess);
          },
          [&](const TruncGeomLaw& g) {
            return detail::discrete_generalized_inverse(law, u, static_cast<double>(-g.ell));
          },
          [&](const ShiftGeomLaw& g) {
            const double guess = std::max(0.0, std::ceil(std::log1p(-u) / std::log(g.theta)) - 1.0);
            return detail::discrete_generalized_inverse(law, u, guess - static_cast<double>(g.ell));
          },
          [&](const ThreePointLaw&) { return detail::discrete_generalized_inverse(law, u, -1.0); },
          [&](const ParityGeomLaw&) { return detail::discrete_generalized_inverse(law, u, 0.0); },
          [&](const FiniteTableLaw& t) {
            double acc = 0.0;
            for (std::size_t i = 0; i < t.values.size(); ++i) {
              acc += t.probs[i];
              if (acc >= u) return t.values[i];
            }
            return t.values.back();
          },
      },
      law.variant());
}

/// One draw from the law; consumes a deterministic number of stream outputs per accepted draw.
inline double sample(const Law& law, Stream& rng) {
  using detail::overloaded;
  return std::visit(
      overloaded{
          [&](const GammaLaw& g) { return detail::sample_gamma(g.shape, g.rate, rng); },
          [&](const GigLaw& g) {
            const double lh_mode = detail::gig_log_unnormalized(g, g.mode);
            for (;;) {
              const double u = rng.uniform();
              const double v = g.rou_vmin + (g.rou_vmax - g.rou_vmin) * rng.uniform();
              const double x = v / u + g.mode;
              if (x <= 0.0) continue;
              if (2.0 * std::log(u) <= detail::gig_log_unnormalized(g, x) - lh_mode) return x;
            }
          },
          [&](const BetaLaw& b) {
            const double x = detail::sample_gamma(b.a, 1.0, rng);
            const double y = detail::sample_gamma(b.b, 1.0, rng);
            return x / (x + y);
          },
          [&](const BernoulliLaw& b) { return rng.uniform() < b.p ? 1.0 : 0.0; },
          [&](const UniformUnitLaw&) { return rng.uniform(); },
          [&](const NormalLaw& n) { return n.mean + std::sqrt(n.variance) * rng.normal(); },
          [&](const auto&) { return quantile(law, rng.uniform()); },
      },
      law.variant());
}

/// Mean of the law (quadrature for GIG).
inline double mean(const Law& law) {
  using detail::overloaded;
  return std::visit(
      overloaded{
          [](const GammaLaw& g) { return g.shape / g.rate; },
          [](const GigLaw& g) {
            const double peak = detail::gig_t_peak(g.alpha - 1.0, g.lambda);
            const double shift = detail::gig_log_t_integrand(g.alpha - 1.0, g.lambda, peak);
            const double part = detail::gig_partial_integral(
                g.alpha - 1.0, g.lambda, -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), shift);
            return std::exp(g.log_norm_const + shift) * part;
          },
          [](const BetaLaw& b) { return b.a / (b.a + b.b); },
          [](const BernoulliLaw& b) { return b.p; },
          [](const UniformUnitLaw&) { return 0.5; },
          [](const NormalLaw& n) { return n.mean; },
          [](const GeometricLaw& g) { return g.theta / (1.0 - g.theta); },
          [](const TruncGeomLaw& g) {
            double s = 0.0;
            for (std::int64_t i = -g.ell; i <= g.ell; ++i) {
              s += static_cast<double>(i) * std::pow(g.theta, static_cast<double>(i));
            }
            return s / g.norm;
          },
          [](const ShiftGeomLaw& g) { return g.theta / (1.0 - g.theta) - static_cast<double>(g.ell); },
          [](const ThreePointLaw& t) { return t.p - t.q; },
          [](const ParityGeomLaw& g) {
            const double rho2 = g.rho * g.rho;
            const double half_mean = rho2 / (1.0 - rho2);  // mean of geo(rho^2)
            return (1.0 - g.podd) * 2.0 * half_mean + g.podd * (2.0 * half_mean + 1.0);
          },
          [](const FiniteTableLaw& t) {
            return std::inner_product(t.values.begin(), t.values.end(), t.probs.begin(), 0.0);
          },
      },
      law.variant());
}

/// Smallest support point of a discrete law bounded below.
inline double support_min(const Law& law) {
  using detail::overloaded;
  return std::visit(overloaded{
                        [](const TruncGeomLaw& g) { return static_cast<double>(-g.ell); },
                        [](const ShiftGeomLaw& g) { return static_cast<double>(-g.ell); },
                        [](const ThreePointLaw&) { return -1.0; },
                        [](const FiniteTableLaw& t) { return t.values.front(); },
                        [](const GeometricLaw&) { return 0.0; },
                        [](const ParityGeomLaw&) { return 0.0; },
                        [](const BernoulliLaw&) { return 0.0; },
                        [](const auto&) -> double {
                          throw std::invalid_argument("support_min: continuous law");
                        },
                    },
                    law.variant());
}

struct Truncation {
  Law table;          // always a FiniteTableLaw
  double tail_mass;   // mass outside [lo, hi] before renormalization
};

/// Restrict a discrete law to the integers in [lo, hi] and renormalize.
inline Truncation truncate(const Law& law, double lo, double hi) {
  if (!law.discrete()) throw std::invalid_argument("truncate: continuous law " + law.name());
  detail::require(lo <= hi, "truncate: empty range");
  std::vector<double> values;
  std::vector<double> probs;
  double kept = 0.0;
  const double start = std::max(std::ceil(lo), support_min(law));
  for (double k = start; k <= hi; k += 1.0) {
    const double w = density(law, k);
    if (w > 0.0) {
      values.push_back(k);
      probs.push_back(w);
      kept += w;
    }
  }
  detail::require(kept > 0.0, "truncate: range carries no mass");
  const double below = start > support_min(law) ? cdf(law, start - 1.0) : 0.0;
  const double tail = survival(law, std::floor(hi)) + below;
  for (double& w : probs) w /= kept;
  // renormalized probabilities can drift from 1 by rounding; fold into the largest cell
  const double drift = 1.0 - std::accumulate(probs.begin(), probs.end(), 0.0);
  *std::max_element(probs.begin(), probs.end()) += drift;
  return {Law::finite_table(std::move(values), std::move(probs)), tail};
}

// ---------------------------------------------------------------------------
// Names and parameter maps (used by reports and configuration)
// ---------------------------------------------------------------------------

inline bool Law::integer_valued() const { return discrete(); }

inline std::string Law::kind() const {
  using detail::overloaded;
  return std::visit(overloaded{
                        [](const GammaLaw&) { return std::string("Gamma"); },
                        [](const GigLaw&) { return std::string("GIG"); },
                        [](const BetaLaw&) { return std::string("BetaI"); },
                        [](const BernoulliLaw&) { return std::string("Bernoulli"); },
                        [](const UniformUnitLaw&) { return std::string("UniformUnit"); },
                        [](const NormalLaw&) { return std::string("Normal"); },
                        [](const GeometricLaw&) { return std::string("Geometric"); },
                        [](const TruncGeomLaw&) { return std::string("TruncGeom"); },
                        [](const ShiftGeomLaw&) { return std::string("ShiftGeom"); },
                        [](const ThreePointLaw&) { return std::string("ThreePoint"); },
                        [](const ParityGeomLaw&) { return std::string("ParityGeom"); },
                        [](const FiniteTableLaw&) { return std::string("FiniteTable"); },
                    },
                    v_);
}

inline std::map<std::string, double> Law::params() const {
  using detail::overloaded;
  using P = std::map<std::string, double>;
  return std::visit(
      overloaded{
          [](const GammaLaw& g) { return P{{"shape", g.shape}, {"rate", g.rate}}; },
          [](const GigLaw& g) { return P{{"alpha", g.alpha}, {"lambda", g.lambda}}; },
          [](const BetaLaw& b) { return P{{"a", b.a}, {"b", b.b}}; },
          [](const BernoulliLaw& b) { return P{{"p", b.p}}; },
          [](const UniformUnitLaw&) { return P{}; },
          [](const NormalLaw& n) { return P{{"mean", n.mean}, {"variance", n.variance}}; },
          [](const GeometricLaw& g) { return P{{"theta", g.theta}}; },
          [](const TruncGeomLaw& g) { return P{{"theta", g.theta}, {"ell", static_cast<double>(g.ell)}}; },
          [](const ShiftGeomLaw& g) { return P{{"theta", g.theta}, {"ell", static_cast<double>(g.ell)}}; },
          [](const ThreePointLaw& t) { return P{{"p", t.p}, {"q", t.q}, {"r", t.r}}; },
          [](const ParityGeomLaw& g) { return P{{"rho", g.rho}, {"podd", g.podd}}; },
          [](const FiniteTableLaw& t) { return P{{"cells", static_cast<double>(t.values.size())}}; },
      },
      v_);
}

inline std::string Law::name() const {
  std::ostringstream os;
  os.precision(6);
  os << kind() << '(';
  bool first = true;
  for (const auto& [k, v] : params()) {
    os << (first ? "" : ",") << k << '=' << v;
    first = false;
  }
  os << ')';
  return os.str();
}

/// Build a law from its kind name and a parameter map, as written in run configurations.
inline Law make_law(std::string_view kind, const std::map<std::string, double>& params) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw std::invalid_argument(std::string(kind) + ": missing parameter '" + key + "'");
    }
    return it->second;
  };
  auto get_even = [&](const char* key) {
    const double v = get(key);
    detail::require(detail::is_integer(v), std::string(kind) + ": '" + key + "' must be an integer");
    return static_cast<std::int64_t>(v);
  };
  if (kind == "Gamma") return Law::gamma(get("shape"), get("rate"));
  if (kind == "GIG") return Law::gig(get("alpha"), get("lambda"));
  if (kind == "BetaI") return Law::beta(get("a"), get("b"));
  if (kind == "Bernoulli") return Law::bernoulli(get("p"));
  if (kind == "UniformUnit") return Law::uniform_unit();
  if (kind == "Normal") return Law::normal(get("mean"), get("variance"));
  if (kind == "Geometric") return Law::geometric(get("theta"));
  if (kind == "TruncGeom") return Law::trunc_geom(get("theta"), get_even("ell"));
  if (kind == "ShiftGeom") return Law::shift_geom(get("theta"), get_even("ell"));
  if (kind == "ThreePoint") return Law::three_point(get("p"), get("q"), get("r"));
  if (kind == "ParityGeom") return Law::parity_geom(get("rho"), get("podd"));
  throw std::invalid_argument("unknown law kind '" + std::string(kind) + "'");
}

}  // namespace revip
