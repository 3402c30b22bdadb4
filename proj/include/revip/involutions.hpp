#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "revip/report.hpp"
#include "revip/rng.hpp"
#include "revip/special.hpp"
#include "revip/spaces.hpp"

namespace revip {

using Params = std::map<std::string, double>;

/// A map H = (f, g) on X x U, meant to satisfy H o H = id.
template <class X, class U>
struct Involution {
  using state_type = X;
  using noise_type = U;

  std::string name;
  Space x_space;
  Space u_space;
  Params params;
  std::function<X(const X&, const U&)> f;
  std::function<U(const X&, const U&)> g;
};

// ---------------------------------------------------------------------------
// Formatting of points for witnesses
// ---------------------------------------------------------------------------

inline std::string to_text(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}
inline std::string to_text(std::int64_t x) { return std::to_string(x); }
inline std::string to_text(const BernoulliUnit& x) {
  return "(" + std::to_string(x.coin) + "," + to_text(x.unit) + ")";
}
template <int D>
std::string to_text(const SpdMatrix<D>& m) {
  std::ostringstream os;
  os.precision(10);
  os << '[';
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) os << (i + j ? " " : "") << m(i, j);
    if (i + 1 < D) os << ';';
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Application and round-trip checking
// ---------------------------------------------------------------------------

template <class X, class U>
std::pair<X, U> apply(const Involution<X, U>& h, const X& x, const U& u) {
  if (!contains(h.x_space, x) || !contains(h.u_space, u)) {
    throw DomainError(h.name + ": input (" + to_text(x) + ", " + to_text(u) + ") outside domain");
  }
  X y = h.f(x, u);
  U v = h.g(x, u);
  if (!contains(h.x_space, y) || !contains(h.u_space, v)) {
    throw DomainError(h.name + ": output (" + to_text(y) + ", " + to_text(v) + ") at input (" +
                      to_text(x) + ", " + to_text(u) + ") outside domain");
  }
  return {std::move(y), std::move(v)};
}

/// Default round-trip tolerance for the pair's spaces: exact on integers,
/// 1e-7 Frobenius for SPD matrices, 1e-9 relative otherwise.
inline double default_involution_tolerance(const Space& x_space) {
  switch (x_space.kind) {
    case SpaceKind::Integers:
    case SpaceKind::NonNegIntegers: return 0.0;
    case SpaceKind::Spd: return 1e-7;
    default: return 1e-9;
  }
}

/// Max componentwise deviation of H(H(x,u)) from (x,u) over the points.
/// Domain violations on either application count as failures.
template <class X, class U>
VerificationReport check_involution(const Involution<X, U>& h, std::span<const std::pair<X, U>> points,
                                    double tol) {
  VerificationReport r;
  r.name = "involution:" + h.name;
  double worst_x = 0.0;
  double worst_u = 0.0;
  double worst = -1.0;
  std::string worst_point;
  std::size_t domain_failures = 0;
  for (const auto& [x, u] : points) {
    try {
      const auto [y, v] = apply(h, x, u);
      const auto [x2, u2] = apply(h, y, v);
      const double dx = deviation(x2, x);
      const double du = deviation(u2, u);
      worst_x = std::max(worst_x, dx);
      worst_u = std::max(worst_u, du);
      if (std::max(dx, du) > worst) {
        worst = std::max(dx, du);
        worst_point = "(" + to_text(x) + ", " + to_text(u) + ")";
      }
    } catch (const DomainError& e) {
      if (domain_failures++ < 5) r.witnesses.emplace_back(e.what());
      r.pass = false;
    }
  }
  r.values["max_deviation_x"] = worst_x;
  r.values["max_deviation_u"] = worst_u;
  r.values["max_deviation"] = std::max(worst_x, worst_u);
  r.values["tolerance"] = tol;
  r.values["points"] = static_cast<double>(points.size());
  r.values["domain_failures"] = static_cast<double>(domain_failures);
  if (std::max(worst_x, worst_u) > tol) {
    r.pass = false;
    r.witnesses.push_back("worst round trip at " + worst_point);
  }
  return r;
}

template <class X, class U>
VerificationReport check_involution(const Involution<X, U>& h, std::span<const std::pair<X, U>> points) {
  return check_involution(h, points, default_involution_tolerance(h.x_space));
}

// ---------------------------------------------------------------------------
// SPD helpers
// ---------------------------------------------------------------------------

/// Spectral power a^p of a symmetric positive definite matrix.
template <int D>
SpdMatrix<D> spd_power(const SpdMatrix<D>& a, double p) {
  Eigen::SelfAdjointEigenSolver<SpdMatrix<D>> es(a);
  const auto& q = es.eigenvectors();
  Eigen::Matrix<double, D, 1> lam = es.eigenvalues();
  for (int i = 0; i < D; ++i) lam(i) = std::pow(std::max(lam(i), 0.0), p);
  SpdMatrix<D> out = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

/// Quadratic representation P_a(b) = a b a, symmetrized.
template <int D>
SpdMatrix<D> quad_rep(const SpdMatrix<D>& a, const SpdMatrix<D>& b) {
  SpdMatrix<D> out = a * b * a;
  return 0.5 * (out + out.transpose());
}

/// B B^T + I / 10 with standard normal B: well conditioned random SPD matrices.
template <int D>
SpdMatrix<D> random_spd(Stream& rng) {
  SpdMatrix<D> b;
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) b(i, j) = rng.normal();
  }
  SpdMatrix<D> out = b * b.transpose() + 0.1 * SpdMatrix<D>::Identity();
  return 0.5 * (out + out.transpose());
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace catalog {

/// (1/(x+u), 1/x - 1/(x+u)) on (0,inf)^2.
inline Involution<double, double> matsumoto_yor() {
  return {"matsumoto_yor",
          {SpaceKind::PositiveReal},
          {SpaceKind::PositiveReal},
          {},
          [](double x, double u) { return 1.0 / (x + u); },
          [](double x, double u) { return u / (x * (x + u)); }};
}

/// (1/u - 1/(x+u), 1/(x+u)) on (0,inf)^2.
inline Involution<double, double> swapped_matsumoto_yor() {
  return {"swapped_matsumoto_yor",
          {SpaceKind::PositiveReal},
          {SpaceKind::PositiveReal},
          {},
          [](double x, double u) { return x / (u * (x + u)); },
          [](double x, double u) { return 1.0 / (x + u); }};
}

/// Matrix Matsumoto-Yor map on SPD(D): f = P_{(I+x)^{-1/2}}(u), g = P_{(I+f)^{1/2}}(x).
template <int D>
Involution<SpdMatrix<D>, SpdMatrix<D>> spd_matsumoto_yor() {
  using M = SpdMatrix<D>;
  auto f = [](const M& x, const M& u) -> M {
    return quad_rep<D>(spd_power<D>(M::Identity() + x, -0.5), u);
  };
  auto g = [f](const M& x, const M& u) -> M {
    const M y = f(x, u);
    return quad_rep<D>(spd_power<D>(M::Identity() + y, 0.5), x);
  };
  return {"spd_matsumoto_yor", {SpaceKind::Spd, D}, {SpaceKind::Spd, D}, {{"d", D}}, f, g};
}

inline std::int64_t positive_part(std::int64_t v) { return v > 0 ? v : 0; }
inline std::int64_t negative_part(std::int64_t v) { return v < 0 ? -v : 0; }

/// Ultra-discrete KdV map: f = u ^ (-x), g1 = x + (x+u)^+.
inline Involution<std::int64_t, std::int64_t> kdv_g1() {
  return {"kdv_g1",
          {SpaceKind::Integers},
          {SpaceKind::Integers},
          {},
          [](std::int64_t x, std::int64_t u) { return std::min(u, -x); },
          [](std::int64_t x, std::int64_t u) { return x + positive_part(x + u); }};
}

/// Same f, with g2 = x + s - (-1)^s + 1{s = 0}, s = (x+u)^+.
inline Involution<std::int64_t, std::int64_t> kdv_g2() {
  return {"kdv_g2",
          {SpaceKind::Integers},
          {SpaceKind::Integers},
          {},
          [](std::int64_t x, std::int64_t u) { return std::min(u, -x); },
          [](std::int64_t x, std::int64_t u) {
            const std::int64_t s = positive_part(x + u);
            const std::int64_t sign = (s % 2 == 0) ? 1 : -1;
            return x + s - sign + (s == 0 ? 1 : 0);
          }};
}

/// ((1-u)/(1-ux), 1-ux) on (0,1)^2.
inline Involution<double, double> beta_map() {
  return {"beta_map",
          {SpaceKind::UnitInterval},
          {SpaceKind::UnitInterval},
          {},
          [](double x, double u) { return (1.0 - u) / (1.0 - u * x); },
          [](double x, double u) { return 1.0 - u * x; }};
}

/// Diaconis-Freedman beta walk f(x,(u0,u1)) = (1-u1) x + u0 u1 and its augmentation.
inline Involution<double, BernoulliUnit> beta_walk() {
  return {"beta_walk",
          {SpaceKind::UnitInterval},
          {SpaceKind::BernoulliCrossUnit},
          {},
          [](double x, const BernoulliUnit& u) { return (1.0 - u.unit) * x + u.coin * u.unit; },
          [](double x, const BernoulliUnit& u) {
            if (u.coin == 0) return BernoulliUnit{1, u.unit * x / (1.0 - x + u.unit * x)};
            return BernoulliUnit{0, u.unit * (1.0 - x) / (u.unit * (1.0 - x) + x)};
          }};
}

/// Reflecting random walk: ((x+u)^+, -u - 2 (x+u)^-) on N0 x {-1,0,1}.
inline Involution<std::int64_t, std::int64_t> reflecting_rw() {
  return {"reflecting_rw",
          {SpaceKind::NonNegIntegers},
          {SpaceKind::ThreePointSet},
          {},
          [](std::int64_t x, std::int64_t u) { return positive_part(x + u); },
          [](std::int64_t x, std::int64_t u) { return -u - 2 * negative_part(x + u); }};
}

/// Gaussian kernel N(beta x, sigma^2) in Skorokhod form with its Rosenblatt codriver.
inline Involution<double, double> gaussian_rosenblatt(double beta, double sigma) {
  if (!(std::abs(beta) < 1.0)) throw std::invalid_argument("gaussian_rosenblatt: |beta| must be < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_rosenblatt: sigma must be positive");
  return {"gaussian_rosenblatt",
          {SpaceKind::RealLine},
          {SpaceKind::UnitInterval},
          {{"beta", beta}, {"sigma", sigma}},
          [beta, sigma](double x, double u) { return beta * x + sigma * normal_quantile(u); },
          [beta, sigma](double x, double u) {
            return normal_cdf((1.0 - beta * beta) * x / sigma - beta * normal_quantile(u));
          }};
}

}  // namespace catalog

using AnyInvolution =
    std::variant<Involution<double, double>, Involution<std::int64_t, std::int64_t>,
                 Involution<double, BernoulliUnit>, Involution<SpdMatrix<2>, SpdMatrix<2>>,
                 Involution<SpdMatrix<3>, SpdMatrix<3>>>;

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{
      "matsumoto_yor", "swapped_matsumoto_yor", "spd_matsumoto_yor", "kdv_g1",
      "kdv_g2",        "beta_map",              "beta_walk",         "reflecting_rw",
      "gaussian_rosenblatt"};
  return names;
}

/// Look up a catalog map by name. Required parameters: `d` in {2,3} for
/// spd_matsumoto_yor, `beta` and `sigma` for gaussian_rosenblatt.
inline AnyInvolution catalog_get(const std::string& name, const Params& params = {}) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw std::invalid_argument(name + ": missing parameter '" + key + "'");
    return it->second;
  };
  if (name == "matsumoto_yor") return catalog::matsumoto_yor();
  if (name == "swapped_matsumoto_yor") return catalog::swapped_matsumoto_yor();
  if (name == "spd_matsumoto_yor") {
    const double d = get("d");
    if (d == 2.0) return catalog::spd_matsumoto_yor<2>();
    if (d == 3.0) return catalog::spd_matsumoto_yor<3>();
    throw std::invalid_argument("spd_matsumoto_yor: d must be 2 or 3");
  }
  if (name == "kdv_g1") return catalog::kdv_g1();
  if (name == "kdv_g2") return catalog::kdv_g2();
  if (name == "beta_map") return catalog::beta_map();
  if (name == "beta_walk") return catalog::beta_walk();
  if (name == "reflecting_rw") return catalog::reflecting_rw();
  if (name == "gaussian_rosenblatt") return catalog::gaussian_rosenblatt(get("beta"), get("sigma"));
  throw std::invalid_argument("unknown involution '" + name + "'");
}

}  // namespace revip
