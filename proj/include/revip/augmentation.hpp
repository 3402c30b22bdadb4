#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "revip/involutions.hpp"
#include "revip/report.hpp"
#include "revip/spaces.hpp"
#include "revip/special.hpp"

namespace revip {

enum class SolveStatus { Unique, NonUnique, NoSolution };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Unique: return "Unique";
    case SolveStatus::NonUnique: return "NonUnique";
    case SolveStatus::NoSolution: return "NoSolution";
  }
  return "?";
}

template <class U>
struct Solution {
  SolveStatus status = SolveStatus::NoSolution;
  U u{};

  static Solution unique(U v) { return {SolveStatus::Unique, std::move(v)}; }
  static Solution non_unique() { return {SolveStatus::NonUnique, U{}}; }
  static Solution none() { return {SolveStatus::NoSolution, U{}}; }
};

/// A map f together with a solver for y = f(x, u) in u.
template <class X, class U>
struct FSpec {
  std::string name;
  Space x_space;
  Space u_space;
  std::function<X(const X&, const U&)> f;
  std::function<Solution<U>(const X&, const X&)> solver;
  /// Optional override of the membership test for R_f.
  std::function<bool(const X&, const U&)> fixed_point_flag;
};

/// Raised when a probe falsifies the hypotheses needed for the augmentation.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(const std::string& what, std::string witness)
      : std::runtime_error(what + ": " + witness), witness_(std::move(witness)) {}
  [[nodiscard]] const std::string& witness() const { return witness_; }

 private:
  std::string witness_;
};

template <class X, class U>
Solution<U> sigma_solve(const FSpec<X, U>& spec, const X& x, const X& y) {
  if (!contains(spec.x_space, x) || !contains(spec.x_space, y)) {
    throw DomainError(spec.name + ": sigma_solve at (" + to_text(x) + ", " + to_text(y) + ") outside X");
  }
  return spec.solver(x, y);
}

/// (x, u) belongs to R_f when f(x, .) hits f(x, u) exactly once.
template <class X, class U>
bool in_unique_region(const FSpec<X, U>& spec, const X& x, const U& u) {
  if (spec.fixed_point_flag) return spec.fixed_point_flag(x, u);
  return spec.solver(x, spec.f(x, u)).status == SolveStatus::Unique;
}

/// g_f(x,u) = sigma(f(x,u), x) on R_f and u elsewhere.
template <class X, class U>
U augmented_g(const FSpec<X, U>& spec, const X& x, const U& u) {
  if (!in_unique_region(spec, x, u)) return u;
  const X y = spec.f(x, u);
  const Solution<U> back = spec.solver(y, x);
  if (back.status != SolveStatus::Unique) {
    throw HypothesisViolation(spec.name + ": A_f is not symmetric",
                              "(x,u)=(" + to_text(x) + ", " + to_text(u) + "), y=" + to_text(y) +
                                  ", sigma(y,x) is " + to_string(back.status));
  }
  return back.u;
}

/// Pointwise check of the two hypotheses on a list of probes: every reached
/// pair (x, y) is reachable backwards, and multiplicity only occurs on y = x.
/// Also checks that Unique solutions solve the equation.
template <class X, class U>
VerificationReport verify_hypotheses(const FSpec<X, U>& spec, std::span<const std::pair<X, U>> probes) {
  VerificationReport r;
  r.name = "hypotheses:" + spec.name;
  std::size_t asym = 0;
  std::size_t off_diagonal = 0;
  std::size_t bad_solution = 0;
  std::size_t domain = 0;
  const double tol = default_involution_tolerance(spec.x_space) == 0.0 ? 0.0 : 1e-10;
  auto note = [&](std::size_t count, std::string w) {
    if (count <= 3) r.witnesses.push_back(std::move(w));
  };
  for (const auto& [x, u] : probes) {
    X y;
    try {
      y = spec.f(x, u);
      if (!contains(spec.x_space, x) || !contains(spec.u_space, u) || !contains(spec.x_space, y)) {
        throw DomainError("outside domain");
      }
    } catch (const DomainError&) {
      note(++domain, "domain violation at (x,u)=(" + to_text(x) + ", " + to_text(u) + ")");
      continue;
    }
    const std::string at = "(x,u)=(" + to_text(x) + ", " + to_text(u) + "), y=" + to_text(y);
    const auto fwd = spec.solver(x, y);
    if (fwd.status == SolveStatus::NoSolution) {
      note(++bad_solution, "solver misses the reached value at " + at);
    } else if (fwd.status == SolveStatus::NonUnique && !same_point(y, x)) {
      note(++off_diagonal, "non-unique solution off the diagonal at " + at);
    } else if (fwd.status == SolveStatus::Unique && deviation(spec.f(x, fwd.u), y) > tol) {
      note(++bad_solution, "solver output does not solve f(x,u)=y at " + at);
    }
    if (spec.solver(y, x).status == SolveStatus::NoSolution) {
      note(++asym, "A_f not symmetric at " + at + ": (y,x) unreachable");
    }
  }
  r.values["probes"] = static_cast<double>(probes.size());
  r.values["asymmetry_violations"] = static_cast<double>(asym);
  r.values["off_diagonal_nonunique"] = static_cast<double>(off_diagonal);
  r.values["solver_errors"] = static_cast<double>(bad_solution);
  r.values["domain_violations"] = static_cast<double>(domain);
  r.pass = asym + off_diagonal + bad_solution + domain == 0;
  return r;
}

/// The augmentation (f, g_f). Without probes no hypothesis check is done.
template <class X, class U>
Involution<X, U> augment(const FSpec<X, U>& spec) {
  return {spec.name + "_augmented", spec.x_space, spec.u_space, {}, spec.f,
          [spec](const X& x, const U& u) { return augmented_g(spec, x, u); }};
}

/// As above, after running verify_hypotheses on the probes; throws with the
/// first witness if they fail.
template <class X, class U>
Involution<X, U> augment(const FSpec<X, U>& spec, std::span<const std::pair<X, U>> probes) {
  const auto report = verify_hypotheses(spec, probes);
  if (!report.pass) {
    throw HypothesisViolation(spec.name + ": hypotheses violated",
                              report.witnesses.empty() ? std::string("(no witness)") : report.witnesses.front());
  }
  return augment(spec);
}

// ---------------------------------------------------------------------------
// Numeric solver for real maps monotone in u
// ---------------------------------------------------------------------------

/// Maps s in (0,1) onto the interior of a u-interval.
struct Compactifier {
  double lo;
  double hi;

  [[nodiscard]] double to_u(double s) const {
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) return std::tan(std::numbers::pi * (s - 0.5));
    if (hi_inf) return lo + s / (1.0 - s);
    if (lo_inf) return hi - (1.0 - s) / s;
    return lo + s * (hi - lo);
  }
};

struct MonotoneOptions {
  double u_lo = 0.0;
  double u_hi = std::numeric_limits<double>::infinity();
  /// Points of X at which monotonicity is probed at construction.
  std::vector<double> x_probes{0.1, 0.5, 1.0, 2.0, 10.0};
  std::size_t grid = 1000;
  double plateau_tol = 1e-12;
};

namespace detail {

inline std::vector<double> unit_grid(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return s;
}

}  // namespace detail

/// FSpec for a real f(x, u) that is monotone in u on (u_lo, u_hi). The solver
/// bisects in a compactified coordinate; a flat stretch of f(x, .) at level y
/// spanning two grid points is reported as NonUnique.
inline FSpec<double, double> make_monotone_fspec(std::string name, Space x_space, Space u_space,
                                                 std::function<double(double, double)> f,
                                                 MonotoneOptions opt = {}) {
  const Compactifier comp{opt.u_lo, opt.u_hi};
  const auto grid = detail::unit_grid(opt.grid);
  for (double x : opt.x_probes) {
    if (!contains(x_space, x)) continue;
    int dir = 0;
    double prev = f(x, comp.to_u(grid.front()));
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double cur = f(x, comp.to_u(grid[i]));
      const int d = cur > prev ? 1 : (cur < prev ? -1 : 0);
      if (d != 0 && dir != 0 && d != dir) {
        throw std::invalid_argument(name + ": f(x,.) is not monotone in u at x=" + to_text(x));
      }
      if (d != 0) dir = d;
      prev = cur;
    }
  }
  auto fn = f;
  auto solver = [fn, comp, grid, opt](const double& x, const double& y) -> Solution<double> {
    const double e_lo = 1e-15;
    const double e_hi = 1.0 - 1e-15;
    const double f_lo = fn(x, comp.to_u(e_lo));
    const double f_hi = fn(x, comp.to_u(e_hi));
    const bool inc = f_hi >= f_lo;
    const double lo_val = inc ? f_lo : f_hi;
    const double hi_val = inc ? f_hi : f_lo;
    const double scale = std::max(1.0, std::abs(y));
    if (y < lo_val - 1e-12 * scale || y > hi_val + 1e-12 * scale) return Solution<double>::none();

    std::size_t hits = 0;
    for (double s : grid) {
      if (std::abs(fn(x, comp.to_u(s)) - y) <= opt.plateau_tol * scale && ++hits >= 2) {
        return Solution<double>::non_unique();
      }
    }
    double a = e_lo;
    double b = e_hi;
    for (int it = 0; it < 200 && b - a > 0.0; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double v = fn(x, comp.to_u(m));
      if ((v < y) == inc) {
        a = m;
      } else {
        b = m;
      }
    }
    const double ua = comp.to_u(a);
    const double ub = comp.to_u(b);
    const double u = std::abs(fn(x, ua) - y) <= std::abs(fn(x, ub) - y) ? ua : ub;
    if (std::abs(fn(x, u) - y) > 1e-10 * scale) return Solution<double>::none();
    return Solution<double>::unique(u);
  };
  return {std::move(name), x_space, u_space, std::move(f), solver, {}};
}

/// FSpec for integer maps with a finite noise set; the solver enumerates it.
inline FSpec<std::int64_t, std::int64_t> make_finite_noise_fspec(
    std::string name, Space x_space, Space u_space, std::vector<std::int64_t> noise_values,
    std::function<std::int64_t(std::int64_t, std::int64_t)> f) {
  auto fn = f;
  auto solver = [fn, noise_values](const std::int64_t& x, const std::int64_t& y) {
    std::size_t hits = 0;
    std::int64_t found = 0;
    for (auto u : noise_values) {
      if (fn(x, u) == y) {
        ++hits;
        found = u;
      }
    }
    if (hits == 0) return Solution<std::int64_t>::none();
    if (hits > 1) return Solution<std::int64_t>::non_unique();
    return Solution<std::int64_t>::unique(found);
  };
  return {std::move(name), x_space, u_space, std::move(f), solver, {}};
}

// ---------------------------------------------------------------------------
// Catalog f-specs with closed-form solvers
// ---------------------------------------------------------------------------

namespace fspecs {

inline FSpec<double, double> matsumoto_yor() {
  const auto h = catalog::matsumoto_yor();
  return {"matsumoto_yor", h.x_space, h.u_space, h.f, [](const double& x, const double& y) {
            if (x * y >= 1.0) return Solution<double>::none();
            return Solution<double>::unique(1.0 / y - x);
          }, {}};
}

inline FSpec<double, double> swapped_matsumoto_yor() {
  const auto h = catalog::swapped_matsumoto_yor();
  return {"swapped_matsumoto_yor", h.x_space, h.u_space, h.f, [](const double& x, const double& y) {
            const double xy = x * y;
            return Solution<double>::unique(2.0 * x / (std::sqrt(xy * (4.0 + xy)) + xy));
          }, {}};
}

inline FSpec<double, double> beta_map() {
  const auto h = catalog::beta_map();
  return {"beta_map", h.x_space, h.u_space, h.f, [](const double& x, const double& y) {
            return Solution<double>::unique((1.0 - y) / (1.0 - x * y));
          }, {}};
}

/// f(x, u) = x is impossible for u1 in (0,1), so the diagonal has no solution.
inline FSpec<double, BernoulliUnit> beta_walk() {
  const auto h = catalog::beta_walk();
  return {"beta_walk", h.x_space, h.u_space, h.f, [](const double& x, const double& y) {
            if (y < x) return Solution<BernoulliUnit>::unique({0, 1.0 - y / x});
            if (y > x) return Solution<BernoulliUnit>::unique({1, (y - x) / (1.0 - x)});
            return Solution<BernoulliUnit>::none();
          }, {}};
}

inline FSpec<std::int64_t, std::int64_t> reflecting_rw() {
  const auto h = catalog::reflecting_rw();
  return make_finite_noise_fspec("reflecting_rw", h.x_space, h.u_space, {-1, 0, 1}, h.f);
}

/// f = u ^ (-x) on Z x Z: y < -x is hit once, y = -x by every u >= -x.
inline FSpec<std::int64_t, std::int64_t> kdv() {
  const auto h = catalog::kdv_g1();
  return {"kdv", h.x_space, h.u_space, h.f, [](const std::int64_t& x, const std::int64_t& y) {
            if (y < -x) return Solution<std::int64_t>::unique(y);
            if (y == -x) return Solution<std::int64_t>::non_unique();
            return Solution<std::int64_t>::none();
          }, {}};
}

inline FSpec<double, double> gaussian(double beta, double sigma) {
  const auto h = catalog::gaussian_rosenblatt(beta, sigma);
  return {"gaussian", h.x_space, h.u_space, h.f, [beta, sigma](const double& x, const double& y) {
            return Solution<double>::unique(normal_cdf((y - beta * x) / sigma));
          }, {}};
}

}  // namespace fspecs

}  // namespace revip
