#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "revip/involutions.hpp"
#include "revip/laws.hpp"
#include "revip/report.hpp"

namespace revip {

using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Scalar helpers shared by the double and rational paths
// ---------------------------------------------------------------------------

namespace detail {

/// Decimal inputs become rationals with 12 significant decimals after the point.
template <class Real>
Real to_real(double x) {
  if constexpr (std::is_same_v<Real, Rational>) {
    const auto scaled = static_cast<long long>(std::llround(x * 1e12));
    return Rational(scaled, 1'000'000'000'000LL);
  } else {
    return static_cast<Real>(x);
  }
}

template <class Real>
double to_double(const Real& x) {
  if constexpr (std::is_same_v<Real, Rational>) {
    return x.template convert_to<double>();
  } else {
    return static_cast<double>(x);
  }
}

template <class Real>
Real abs_r(const Real& x) {
  return x < Real(0) ? Real(-x) : x;
}

template <class Real>
Real pow_int(Real base, std::int64_t k) {
  Real out(1);
  while (k > 0) {
    if (k & 1) out *= base;
    base *= base;
    k >>= 1;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reflecting random walk: parameters and forced laws
// ---------------------------------------------------------------------------

/// Noise U on {-1,0,1} with P(1)=p, P(-1)=q, P(0)=r. `pprime` is P(V=1),
/// only used when r = 0; negative means "equal to p".
struct RRWParams {
  double p = 0.2;
  double q = 0.5;
  double r = 0.3;
  double pprime = -1.0;

  [[nodiscard]] double p_prime() const { return r > 0.0 || pprime < 0.0 ? p : pprime; }
  [[nodiscard]] double q_prime() const { return p + q - p_prime(); }

  void validate() const {
    if (!(p > 0.0 && q > 0.0 && r >= 0.0)) throw std::invalid_argument("RRWParams: need p, q > 0 and r >= 0");
    if (std::abs(p + q + r - 1.0) > 1e-12) throw std::invalid_argument("RRWParams: p + q + r must be 1");
  }
};

/// Law forced on X by independence of Y and V: geo(p/q) when r > 0, and the
/// parity-geometric law with rho^2 = p p' / (q q') and P(X odd) = p' when r = 0.
inline Law rrw_forced_law(const RRWParams& prm) {
  prm.validate();
  if (prm.r > 0.0) {
    if (!(prm.p < prm.q)) throw std::invalid_argument("rrw_forced_law: r > 0 requires p < q");
    return Law::geometric(prm.p / prm.q);
  }
  const double pp = prm.p_prime();
  if (!(pp > 0.0 && pp < prm.q)) throw std::invalid_argument("rrw_forced_law: p' must lie in (0, q)");
  if (pp == prm.p) return Law::geometric(prm.p / prm.q);
  const double rho2 = prm.p * pp / (prm.q * prm.q_prime());
  return Law::parity_geom(std::sqrt(rho2), pp);
}

/// P(X = k) for k = 0..box, unnormalized (the dropped mass is `tail`).
template <class Real>
struct StateTable {
  std::vector<Real> p;
  Real tail{0};

  [[nodiscard]] std::int64_t box() const { return static_cast<std::int64_t>(p.size()) - 1; }
};

/// Forced law of X tabulated exactly on {0..box}.
template <class Real>
StateTable<Real> rrw_forced_table(const RRWParams& prm, std::int64_t box) {
  (void)rrw_forced_law(prm);  // validation
  using detail::to_real;
  const Real p = to_real<Real>(prm.p);
  const Real q = to_real<Real>(prm.q);
  StateTable<Real> t;
  t.p.resize(static_cast<std::size_t>(box + 1));
  Real total(0);
  if (prm.r > 0.0 || prm.p_prime() == prm.p) {
    const Real theta = p / q;
    Real w = Real(1) - theta;
    for (auto& v : t.p) {
      v = w;
      total += w;
      w *= theta;
    }
  } else {
    const Real pp = to_real<Real>(prm.p_prime());
    const Real qp = p + q - pp;
    const Real rho2 = p * pp / (q * qp);
    Real even = qp * (Real(1) - rho2);
    Real odd = pp * (Real(1) - rho2);
    for (std::size_t k = 0; k < t.p.size(); ++k) {
      if (k % 2 == 0) {
        t.p[k] = even;
        even *= rho2;
      } else {
        t.p[k] = odd;
        odd *= rho2;
      }
      total += t.p[k];
    }
  }
  t.tail = Real(1) - total;
  return t;
}

/// Tabulate a discrete law on {0..box} (double path).
inline StateTable<double> state_table(const Law& law, std::int64_t box) {
  StateTable<double> t;
  double total = 0.0;
  for (std::int64_t k = 0; k <= box; ++k) {
    t.p.push_back(density(law, static_cast<double>(k)));
    total += t.p.back();
  }
  t.tail = std::max(0.0, survival(law, static_cast<double>(box)));
  (void)total;
  return t;
}

/// Move `eps` of mass from state `from` to state `to`.
template <class Real>
StateTable<Real> perturb(StateTable<Real> t, std::int64_t from, std::int64_t to, const Real& eps) {
  if (from < 0 || to < 0 || from > t.box() || to > t.box()) throw std::out_of_range("perturb: state outside box");
  if (t.p[static_cast<std::size_t>(from)] < eps) throw std::invalid_argument("perturb: not enough mass at source");
  t.p[static_cast<std::size_t>(from)] -= eps;
  t.p[static_cast<std::size_t>(to)] += eps;
  return t;
}

// ---------------------------------------------------------------------------
// Joint laws on the grid {0..box+1} x {-1,0,1}
// ---------------------------------------------------------------------------

template <class Real>
struct JointTable {
  std::int64_t rows = 0;          // first coordinate in {0..rows-1}
  std::vector<Real> cells;        // row-major, second coordinate v+1 in {0,1,2}
  Real tail{0};

  [[nodiscard]] Real& at(std::int64_t y, std::int64_t v) { return cells[static_cast<std::size_t>(y * 3 + v + 1)]; }
  [[nodiscard]] const Real& at(std::int64_t y, std::int64_t v) const {
    return cells[static_cast<std::size_t>(y * 3 + v + 1)];
  }
};

template <class Real>
std::array<Real, 3> three_point_probs(const RRWParams& prm) {
  using detail::to_real;
  return {to_real<Real>(prm.q), to_real<Real>(prm.r), to_real<Real>(prm.p)};  // u = -1, 0, 1
}

/// Exact law of (X, U) under independence.
template <class Real>
JointTable<Real> rrw_input_table(const StateTable<Real>& law_x, const RRWParams& prm) {
  const auto nu = three_point_probs<Real>(prm);
  JointTable<Real> j;
  j.rows = law_x.box() + 2;
  j.cells.assign(static_cast<std::size_t>(j.rows * 3), Real(0));
  for (std::int64_t x = 0; x <= law_x.box(); ++x) {
    for (std::int64_t u = -1; u <= 1; ++u) j.at(x, u) = law_x.p[static_cast<std::size_t>(x)] * nu[u + 1];
  }
  j.tail = law_x.tail;
  return j;
}

/// Exact law of (Y, V) = ((X+U)^+, -U - 2 (X+U)^-).
template <class Real>
JointTable<Real> rrw_joint_table(const StateTable<Real>& law_x, const RRWParams& prm) {
  prm.validate();
  const auto nu = three_point_probs<Real>(prm);
  const auto h = catalog::reflecting_rw();
  JointTable<Real> j;
  j.rows = law_x.box() + 2;
  j.cells.assign(static_cast<std::size_t>(j.rows * 3), Real(0));
  for (std::int64_t x = 0; x <= law_x.box(); ++x) {
    for (std::int64_t u = -1; u <= 1; ++u) {
      j.at(h.f(x, u), h.g(x, u)) += law_x.p[static_cast<std::size_t>(x)] * nu[u + 1];
    }
  }
  j.tail = law_x.tail;
  return j;
}

/// TV distance between the joint table and the product of its marginals.
template <class Real>
Real product_defect_tv(const JointTable<Real>& j) {
  std::vector<Real> row(static_cast<std::size_t>(j.rows), Real(0));
  std::array<Real, 3> col{Real(0), Real(0), Real(0)};
  for (std::int64_t y = 0; y < j.rows; ++y) {
    for (std::int64_t v = -1; v <= 1; ++v) {
      row[static_cast<std::size_t>(y)] += j.at(y, v);
      col[v + 1] += j.at(y, v);
    }
  }
  Real tv(0);
  for (std::int64_t y = 0; y < j.rows; ++y) {
    for (std::int64_t v = -1; v <= 1; ++v) {
      tv += detail::abs_r<Real>(j.at(y, v) - row[static_cast<std::size_t>(y)] * col[v + 1]);
    }
  }
  return tv / Real(2);
}

// ---------------------------------------------------------------------------
// Proof identities
// ---------------------------------------------------------------------------

/// Residuals of every identity used to derive the forced law, evaluated on the
/// exact joint table of (Y, V). Per-index identities are checked for k <= box-2,
/// where truncation does not reach. Equality in law of (X,U) and (Y,V) is
/// checked cellwise on y <= box-1 when p' = p.
template <class Real>
VerificationReport rrw_verify_proof_identities(const StateTable<Real>& law_x, const RRWParams& prm,
                                               double tol = 1e-12) {
  using detail::abs_r;
  using detail::to_double;
  const JointTable<Real> joint = rrw_joint_table(law_x, prm);
  const auto nu = three_point_probs<Real>(prm);
  const Real& q = nu[0];
  const Real& r = nu[1];
  const Real& p = nu[2];
  const std::int64_t box = law_x.box();

  std::vector<Real> py(static_cast<std::size_t>(joint.rows), Real(0));
  std::array<Real, 3> pv{Real(0), Real(0), Real(0)};
  for (std::int64_t y = 0; y < joint.rows; ++y) {
    for (std::int64_t v = -1; v <= 1; ++v) {
      py[static_cast<std::size_t>(y)] += joint.at(y, v);
      pv[v + 1] += joint.at(y, v);
    }
  }
  const Real& qp = pv[0];
  const Real& rp = pv[1];
  const Real& ppr = pv[2];
  auto px = [&](std::int64_t k) -> const Real& { return law_x.p[static_cast<std::size_t>(k)]; };
  auto pyk = [&](std::int64_t k) -> const Real& { return py[static_cast<std::size_t>(k)]; };

  VerificationReport rep;
  rep.name = "rrw_proof_identities";
  auto put = [&](const std::string& key, const Real& residual) {
    const double d = to_double<Real>(abs_r<Real>(residual));
    rep.values[key] = d;
    rep.require(d <= tol, key + " residual " + to_text(d));
  };
  auto max_over_k = [&](const std::string& key, auto&& term, std::int64_t kmax) {
    Real worst(0);
    for (std::int64_t k = 0; k <= kmax; ++k) worst = std::max(worst, abs_r<Real>(term(k)));
    put(key, worst);
  };

  put("zero_state", px(0) * q - pyk(0) * qp);
  max_over_k("stay", [&](std::int64_t k) { return Real(px(k) * r - pyk(k) * rp); }, box - 2);
  max_over_k("down", [&](std::int64_t k) { return Real(px(k + 1) * q - pyk(k) * ppr); }, box - 2);
  max_over_k("up", [&](std::int64_t k) { return Real(px(k) * p - pyk(k + 1) * qp); }, box - 2);
  put("v_up_mass", ppr - (Real(1) - px(0)) * q);
  put("noise_sums", (p + q) - (ppr + qp));

  Real x_even(0), x_odd(0), y_even(0), y_odd(0);
  for (std::int64_t k = 0; k <= box; ++k) (k % 2 == 0 ? x_even : x_odd) += px(k);
  for (std::int64_t k = 0; k < joint.rows; ++k) (k % 2 == 0 ? y_even : y_odd) += pyk(k);
  const double parity_slack = to_double<Real>(law_x.tail) * 4.0;
  auto put_parity = [&](const std::string& key, const Real& residual) {
    const double d = to_double<Real>(abs_r<Real>(residual));
    rep.values[key] = d;
    rep.require(d <= tol + parity_slack, key + " residual " + to_text(d));
  };
  put_parity("x_odd_y_even", x_odd * q - y_even * ppr);
  put_parity("x_even_y_odd", x_even * p - y_odd * qp);
  if (prm.r == 0.0) {
    // without laziness Y is even exactly when X is odd or X + U = -1
    put_parity("parity_balance", x_odd + q - y_even - ppr);
    put_parity("y_even_is_q", y_even - q);
    put_parity("x_odd_is_p_prime", x_odd - ppr);
  }

  rep.values["p_prime"] = to_double<Real>(ppr);
  rep.values["q_prime"] = to_double<Real>(qp);
  rep.values["product_defect_tv"] = to_double<Real>(product_defect_tv(joint));
  rep.require(rep.values["product_defect_tv"] <= tol, "Y and V are not independent");

  if (prm.r > 0.0 || prm.p_prime() == prm.p) {
    const JointTable<Real> input = rrw_input_table(law_x, prm);
    bool equal = true;
    Real worst(0);
    for (std::int64_t y = 0; y <= box - 1; ++y) {
      for (std::int64_t v = -1; v <= 1; ++v) {
        const Real d = abs_r<Real>(joint.at(y, v) - input.at(y, v));
        if (d != Real(0)) equal = false;
        worst = std::max(worst, d);
      }
    }
    rep.values["identity_max_deviation"] = to_double<Real>(worst);
    rep.info["identity_exact"] = equal ? "true" : "false";
    rep.require(to_double<Real>(worst) <= tol, "(X,U) and (Y,V) differ in law");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Necessity oracle
// ---------------------------------------------------------------------------

struct FeasibilityResult {
  bool feasible = false;
  double best_pprime = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t candidates = 0;
};

namespace detail {

/// The identities leave one free number, p' = P(V=1): given it, P(X=0) = 1 - p'/q
/// and the per-index relations determine the whole law. The score measures how
/// far the resulting vector is from a probability law making Y and V independent.
inline double rrw_candidate_score(const RRWParams& prm, double pp, std::int64_t box, StateTable<double>* out) {
  const double qp = prm.p + prm.q - pp;
  StateTable<double> t;
  t.p.assign(static_cast<std::size_t>(box + 1), 0.0);
  t.p[0] = 1.0 - pp / prm.q;
  if (prm.r > 0.0) {
    // X and Y share their law; "down" gives the ratio, "up" must agree with it
    for (std::int64_t k = 0; k < box; ++k) t.p[static_cast<std::size_t>(k + 1)] = t.p[static_cast<std::size_t>(k)] * pp / prm.q;
  } else {
    // alternate between the X and Y recursions starting from P(Y=0) = P(X=0) q / q'
    std::vector<double> y(static_cast<std::size_t>(box + 1), 0.0);
    y[0] = t.p[0] * prm.q / qp;
    for (std::int64_t k = 0; k < box; ++k) {
      t.p[static_cast<std::size_t>(k + 1)] = y[static_cast<std::size_t>(k)] * pp / prm.q;
      y[static_cast<std::size_t>(k + 1)] = t.p[static_cast<std::size_t>(k)] * prm.p / qp;
    }
  }
  double total = 0.0;
  double negative = 0.0;
  for (double& v : t.p) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    negative += std::max(0.0, -v);
    total += v;
  }
  t.tail = std::max(0.0, 1.0 - total);
  const double boundary = std::abs(t.p.back()) + std::abs(t.p[t.p.size() - 2]);
  const double defect = product_defect_tv(rrw_joint_table(t, prm));
  if (out != nullptr) *out = t;
  return std::abs(total - 1.0) + negative + boundary + defect;
}

}  // namespace detail

/// Search for a law on {0..box} satisfying all proof relations. p' is scanned
/// over (0, q) and refined by golden-section search around the best grid point.
inline FeasibilityResult rrw_feasibility(const RRWParams& prm, std::int64_t box = 200, double threshold = 1e-6,
                                         std::size_t grid = 400) {
  prm.validate();
  FeasibilityResult res;
  const double hi = std::min(prm.q, prm.p + prm.q);
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < grid; ++i) {
    const double pp = hi * static_cast<double>(i) / static_cast<double>(grid);
    const double s = detail::rrw_candidate_score(prm, pp, box, nullptr);
    ++res.candidates;
    if (s < res.best_score) {
      res.best_score = s;
      res.best_pprime = pp;
      best_i = i;
    }
  }
  double a = hi * static_cast<double>(best_i - 1) / static_cast<double>(grid);
  double b = hi * static_cast<double>(best_i + 1) / static_cast<double>(grid);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = detail::rrw_candidate_score(prm, c, box, nullptr);
  double fd = detail::rrw_candidate_score(prm, d, box, nullptr);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = detail::rrw_candidate_score(prm, c, box, nullptr);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = detail::rrw_candidate_score(prm, d, box, nullptr);
    }
    res.candidates += 1;
  }
  for (const auto& [pp, s] : {std::pair{c, fc}, std::pair{d, fd}}) {
    if (s < res.best_score) {
      res.best_score = s;
      res.best_pprime = pp;
    }
  }
  res.feasible = res.best_score <= threshold;
  return res;
}

// ---------------------------------------------------------------------------
// Ultra-discrete KdV: exact pushforward of mu_{theta,ell} x nu_{theta,ell}
// ---------------------------------------------------------------------------

enum class KdvVariant { G1, G2 };

struct KdvTvResult {
  double tv = 0.0;
  double tail_bound = 0.0;
  std::int64_t witness_y = 0;
  std::int64_t witness_v = 0;
  double witness_gap = 0.0;
};

/// TV between H#(mu x nu) and mu x nu, with nu cut at M; the dropped mass of nu
/// is theta^{M+1+ell}. Computed in exact rational arithmetic.
inline KdvTvResult kdv_pushforward_tv(double theta, std::int64_t ell, KdvVariant variant, std::int64_t m,
                                      double max_tail = 1e-12) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("kdv_pushforward_tv: theta must lie in (0,1)");
  if (ell < 2 || ell % 2 != 0) throw std::invalid_argument("kdv_pushforward_tv: ell must be a positive even integer");
  if (m < ell) throw std::invalid_argument("kdv_pushforward_tv: M must be at least ell");
  KdvTvResult res;
  res.tail_bound = std::pow(theta, static_cast<double>(m + 1 + ell));
  if (res.tail_bound > max_tail) {
    throw std::invalid_argument("kdv_pushforward_tv: tail bound " + to_text(res.tail_bound) + " exceeds " +
                                to_text(max_tail) + "; increase M");
  }
  const Rational th = detail::to_real<Rational>(theta);
  // mu(x) = theta^x / Z on {-ell..ell}; nu(u) = (1 - theta) theta^{u+ell} on {-ell, ...}
  Rational z(0);
  for (std::int64_t x = -ell; x <= ell; ++x) z += detail::pow_int(th, x + ell);
  auto mu = [&](std::int64_t x) -> Rational {
    if (x < -ell || x > ell) return Rational(0);
    return detail::pow_int(th, x + ell) / z;
  };
  auto nu = [&](std::int64_t u) -> Rational {
    if (u < -ell) return Rational(0);
    return (Rational(1) - th) * detail::pow_int(th, u + ell);
  };
  const auto h = variant == KdvVariant::G1 ? catalog::kdv_g1() : catalog::kdv_g2();
  std::map<std::pair<std::int64_t, std::int64_t>, Rational> push;
  for (std::int64_t x = -ell; x <= ell; ++x) {
    for (std::int64_t u = -ell; u <= m; ++u) push[{h.f(x, u), h.g(x, u)}] += mu(x) * nu(u);
  }
  std::map<std::pair<std::int64_t, std::int64_t>, Rational> cells = push;
  for (std::int64_t y = -ell; y <= ell; ++y) {
    for (std::int64_t v = -ell; v <= m; ++v) cells.try_emplace({y, v}, Rational(0));
  }
  Rational tv(0);
  Rational worst(-1);
  for (const auto& [cell, pushed] : cells) {
    const Rational gap = detail::abs_r<Rational>(pushed - mu(cell.first) * nu(cell.second));
    tv += gap;
    if (gap > worst) {
      worst = gap;
      res.witness_y = cell.first;
      res.witness_v = cell.second;
    }
  }
  res.tv = detail::to_double<Rational>(tv / 2);
  res.witness_gap = detail::to_double<Rational>(worst);
  return res;
}

inline VerificationReport kdv_dichotomy_report(double theta, std::int64_t ell, std::int64_t m,
                                               double max_tail = 1e-12) {
  VerificationReport r;
  r.name = "kdv_tv(theta=" + to_text(theta) + ",ell=" + std::to_string(ell) + ",M=" + std::to_string(m) + ")";
  const auto g1 = kdv_pushforward_tv(theta, ell, KdvVariant::G1, m, max_tail);
  const auto g2 = kdv_pushforward_tv(theta, ell, KdvVariant::G2, m, max_tail);
  r.values["tail_bound"] = g1.tail_bound;
  r.values["tv_g1"] = g1.tv;
  r.values["tv_g2"] = g2.tv;
  r.values["g2_witness_gap"] = g2.witness_gap;
  r.info["g2_witness_cell"] = "(" + std::to_string(g2.witness_y) + "," + std::to_string(g2.witness_v) + ")";
  r.require(g1.tv <= 10.0 * g1.tail_bound, "g1 moves the product law beyond the truncation bound");
  r.require(g2.tv > 10.0 * g2.tail_bound, "g2 appears to preserve the product law");
  return r;
}

}  // namespace revip
