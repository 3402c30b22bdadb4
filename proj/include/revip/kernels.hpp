#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "revip/involutions.hpp"
#include "revip/laws.hpp"
#include "revip/report.hpp"
#include "revip/rng.hpp"
#include "revip/stat_tests.hpp"

namespace revip {

// ---------------------------------------------------------------------------
// Sampleable, testable laws over arbitrary value types
// ---------------------------------------------------------------------------

/// A law on T: sampler, goodness-of-fit test and an injective projection to
/// the real line used by binned two-dimensional tests.
template <class T>
struct Distribution {
  std::string name;
  std::function<T(Stream&)> sample;
  std::function<TestResult(std::span<const T>, double)> gof;
  std::function<double(const T&)> key;
  /// Underlying scalar law when there is one.
  std::optional<Law> law;
};

template <class T>
Distribution<T> from_law(const Law& law) {
  Distribution<T> d;
  d.name = law.name();
  d.law = law;
  if constexpr (std::is_same_v<T, double>) {
    d.sample = [law](Stream& rng) { return sample(law, rng); };
    d.gof = [law](std::span<const double> xs, double level) { return gof_law(xs, law, level); };
    d.key = [](const double& x) { return x; };
  } else {
    static_assert(std::is_same_v<T, std::int64_t>, "from_law: double or int64 states only");
    if (!law.discrete()) throw std::invalid_argument("from_law: integer states need a discrete law");
    d.sample = [law](Stream& rng) { return static_cast<std::int64_t>(std::llround(sample(law, rng))); };
    d.gof = [law](std::span<const std::int64_t> xs, double level) {
      std::vector<double> v(xs.begin(), xs.end());
      return gof_law(v, law, level);
    };
    d.key = [](const std::int64_t& x) { return static_cast<double>(x); };
  }
  return d;
}

/// Independent Bernoulli(p) coin and a law on (0,1) for the unit coordinate.
inline Distribution<BernoulliUnit> bernoulli_unit(double p, const Law& unit) {
  const Law coin = Law::bernoulli(p);
  Distribution<BernoulliUnit> d;
  d.name = "Product(" + coin.name() + "," + unit.name() + ")";
  d.sample = [coin, unit](Stream& rng) {
    const int c = sample(coin, rng) > 0.5 ? 1 : 0;
    return BernoulliUnit{c, sample(unit, rng)};
  };
  d.gof = [coin, unit](std::span<const BernoulliUnit> xs, double level) {
    std::vector<double> coins;
    std::vector<double> units;
    coins.reserve(xs.size());
    units.reserve(xs.size());
    for (const auto& x : xs) {
      coins.push_back(x.coin);
      units.push_back(x.unit);
    }
    return bonferroni({gof_law(coins, coin, level), gof_law(units, unit, level)}, "bonferroni(coin,unit)",
                      level);
  };
  d.key = [](const BernoulliUnit& x) { return x.coin + x.unit; };
  return d;
}

/// Point mass, for deterministic driving of chains.
template <class T>
Distribution<T> constant_distribution(T value) {
  Distribution<T> d;
  d.name = "Constant(" + to_text(value) + ")";
  d.sample = [value](Stream&) { return value; };
  d.gof = [value](std::span<const T> xs, double level) {
    TestResult t;
    t.method = "exact_constant";
    t.n = {xs.size()};
    t.level = level;
    t.p_value = 1.0;
    for (const auto& x : xs) {
      if (!same_point(x, value)) t.p_value = 0.0;
    }
    t.decide();
    return t;
  };
  if constexpr (std::is_same_v<T, BernoulliUnit>) {
    d.key = [](const T& v) { return static_cast<double>(v.coin) + v.unit; };
  } else if constexpr (std::is_arithmetic_v<T>) {
    d.key = [](const T& v) { return static_cast<double>(v); };
  }
  return d;
}

// ---------------------------------------------------------------------------
// Generated kernels and chains
// ---------------------------------------------------------------------------

/// K(x, .) = law of f(x, U) with U ~ noise. `g`, when set, is the codriver map.
template <class X, class U>
struct GeneratedKernel {
  std::string name;
  std::function<X(const X&, const U&)> f;
  std::function<U(const X&, const U&)> g;
  Distribution<U> noise;
};

template <class X, class U>
GeneratedKernel<X, U> make_kernel(const Involution<X, U>& h, Distribution<U> noise) {
  return {h.name, h.f, h.g, std::move(noise)};
}

template <class X, class U>
X kernel_step(const GeneratedKernel<X, U>& k, const X& x, Stream& rng) {
  return k.f(x, k.noise.sample(rng));
}

template <class X, class U>
struct ChainPath {
  std::vector<X> states;     // X^0 .. X^T
  std::vector<U> drivers;    // U^0 .. U^{T-1}
  std::vector<U> codrivers;  // V^0 .. V^{T-1}, empty without g
};

template <class X, class U>
ChainPath<X, U> simulate_chain(const GeneratedKernel<X, U>& k, const X& x0, std::size_t steps, Stream& rng) {
  if (steps < 1) throw std::invalid_argument("simulate_chain: need at least one step");
  ChainPath<X, U> path;
  path.states.reserve(steps + 1);
  path.drivers.reserve(steps);
  path.states.push_back(x0);
  for (std::size_t t = 0; t < steps; ++t) {
    const X& x = path.states.back();
    U u = k.noise.sample(rng);
    X y = k.f(x, u);
    if (k.g) path.codrivers.push_back(k.g(x, u));
    path.drivers.push_back(std::move(u));
    path.states.push_back(std::move(y));
  }
  return path;
}

template <class X, class U>
ChainPath<X, U> simulate_chain(const GeneratedKernel<X, U>& k, const Distribution<X>& init, std::size_t steps,
                               Stream& rng) {
  Stream init_rng = rng.split(0x1417);
  return simulate_chain(k, init.sample(init_rng), steps, rng);
}

/// X^{t+1} = f(X^t, U^t) and V^t = g(X^t, U^t) at every step.
template <class X, class U>
VerificationReport check_chain_path(const GeneratedKernel<X, U>& k, const ChainPath<X, U>& path) {
  VerificationReport r;
  r.name = "chain_path:" + k.name;
  double worst = 0.0;
  for (std::size_t t = 0; t < path.drivers.size(); ++t) {
    const double d = deviation(k.f(path.states[t], path.drivers[t]), path.states[t + 1]);
    worst = std::max(worst, d);
    if (k.g && !path.codrivers.empty()) {
      worst = std::max(worst, deviation(k.g(path.states[t], path.drivers[t]), path.codrivers[t]));
    }
  }
  r.values["max_deviation"] = worst;
  r.require(worst == 0.0, "path does not satisfy its recursion");
  return r;
}

// ---------------------------------------------------------------------------
// Exact detailed balance on integer spaces
// ---------------------------------------------------------------------------

/// Support points of a discrete law with raw (unrenormalized) probabilities,
/// cut where the remaining upper tail falls to `tail_max`.
struct NoiseTable {
  std::vector<std::int64_t> values;
  std::vector<double> probs;
  double tail = 0.0;
};

inline NoiseTable noise_table(const Law& law, double tail_max = 1e-14, std::int64_t max_cells = 1'000'000) {
  if (!law.discrete()) throw std::invalid_argument("noise_table: continuous law " + law.name());
  NoiseTable t;
  auto k = static_cast<std::int64_t>(support_min(law));
  for (std::int64_t i = 0; i < max_cells; ++i, ++k) {
    const double w = density(law, static_cast<double>(k));
    if (w > 0.0) {
      t.values.push_back(k);
      t.probs.push_back(w);
    }
    t.tail = survival(law, static_cast<double>(k));
    if (t.tail <= tail_max) return t;
  }
  throw std::runtime_error("noise_table: tail of " + law.name() + " does not fall below " + to_text(tail_max));
}

/// Row K(x, .) by enumeration of the noise table.
template <class F>
std::map<std::int64_t, double> enumerate_row(F&& f, std::int64_t x, const NoiseTable& noise) {
  std::map<std::int64_t, double> row;
  for (std::size_t i = 0; i < noise.values.size(); ++i) row[f(x, noise.values[i])] += noise.probs[i];
  return row;
}

struct DetailedBalanceOptions {
  /// Residual threshold; negative means 1e-12 + 10 * noise tail.
  double tolerance = -1.0;
  double noise_tail = 1e-14;
};

/// max |mu(x) K(x,y) - mu(y) K(y,x)| over x in [lo, hi] and all y reached from x.
inline VerificationReport check_detailed_balance_exact(const GeneratedKernel<std::int64_t, std::int64_t>& k,
                                                       const Law& mu, std::int64_t lo, std::int64_t hi,
                                                       DetailedBalanceOptions opt = {}) {
  if (!mu.discrete()) throw std::invalid_argument("check_detailed_balance_exact: mu must be discrete");
  if (!k.noise.law || !k.noise.law->discrete()) {
    throw std::invalid_argument("check_detailed_balance_exact: noise must be a discrete law");
  }
  const NoiseTable noise = noise_table(*k.noise.law, opt.noise_tail);
  std::map<std::int64_t, std::map<std::int64_t, double>> rows;
  auto row = [&](std::int64_t x) -> const std::map<std::int64_t, double>& {
    auto it = rows.find(x);
    if (it == rows.end()) it = rows.emplace(x, enumerate_row(k.f, x, noise)).first;
    return it->second;
  };
  auto pmf = [&](std::int64_t x) { return density(mu, static_cast<double>(x)); };
  double worst = 0.0;
  std::pair<std::int64_t, std::int64_t> at{lo, lo};
  for (std::int64_t x = lo; x <= hi; ++x) {
    for (const auto& [y, kxy] : row(x)) {
      const auto& ry = row(y);
      const auto back = ry.find(x);
      const double kyx = back == ry.end() ? 0.0 : back->second;
      const double res = std::abs(pmf(x) * kxy - pmf(y) * kyx);
      if (res > worst) {
        worst = res;
        at = {x, y};
      }
    }
  }
  VerificationReport r;
  r.name = "detailed_balance:" + k.name;
  const double tol = opt.tolerance >= 0.0 ? opt.tolerance : 1e-12 + 10.0 * noise.tail;
  r.values["max_residual"] = worst;
  r.values["noise_tail"] = noise.tail;
  r.values["tolerance"] = tol;
  r.values["box_lo"] = static_cast<double>(lo);
  r.values["box_hi"] = static_cast<double>(hi);
  r.info["mu"] = mu.name();
  r.info["noise"] = k.noise.name;
  r.require(worst <= tol, "largest residual at (x,y)=(" + std::to_string(at.first) + "," +
                              std::to_string(at.second) + ")");
  return r;
}

/// As above over the support of a finite table.
inline VerificationReport check_detailed_balance_exact(const GeneratedKernel<std::int64_t, std::int64_t>& k,
                                                       const Law& mu_table, DetailedBalanceOptions opt = {}) {
  const auto* t = std::get_if<FiniteTableLaw>(&mu_table.variant());
  if (t == nullptr) throw std::invalid_argument("check_detailed_balance_exact: expected a finite table");
  return check_detailed_balance_exact(k, mu_table, static_cast<std::int64_t>(t->values.front()),
                                      static_cast<std::int64_t>(t->values.back()), opt);
}

// ---------------------------------------------------------------------------
// Statistical checks
// ---------------------------------------------------------------------------

/// Split-half exchangeability of (X, f(X, U)) with X ~ mu.
template <class X, class U>
VerificationReport check_reversibility_statistical(const GeneratedKernel<X, U>& k, const Distribution<X>& mu,
                                                   std::size_t n, Stream& rng, double level = kLevel) {
  if (n < 10000) throw std::invalid_argument("check_reversibility_statistical: n must be at least 1e4");
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const X x = mu.sample(rng);
    a[i] = mu.key(x);
    b[i] = mu.key(kernel_step(k, x, rng));
  }
  VerificationReport r;
  r.name = "reversibility:" + k.name;
  r.info["mu"] = mu.name;
  r.info["noise"] = k.noise.name;
  r.values["n"] = static_cast<double>(n);
  r.add_test("exchangeability", exchangeability_test(a, b, 10, 20000, level));
  return r;
}

template <class X, class U>
struct IpSamples {
  std::vector<X> x;
  std::vector<U> u;
  std::vector<X> y;
  std::vector<U> v;
};

/// (Y, V) = H(X, U) with (X, U) ~ mu x nu: Y ~ mu, V ~ nu and Y independent of V.
template <class X, class U>
VerificationReport check_ip_statistical(const Involution<X, U>& h, const Distribution<X>& mu,
                                        const Distribution<U>& nu, std::size_t n, Stream& rng,
                                        double level = kLevel, IpSamples<X, U>* keep = nullptr) {
  std::vector<X> ys;
  std::vector<U> vs;
  ys.reserve(n);
  vs.reserve(n);
  Stream xs_rng = rng.split(1);
  Stream us_rng = rng.split(2);
  for (std::size_t i = 0; i < n; ++i) {
    X x = mu.sample(xs_rng);
    U u = nu.sample(us_rng);
    ys.push_back(h.f(x, u));
    vs.push_back(h.g(x, u));
    if (keep != nullptr) {
      keep->x.push_back(std::move(x));
      keep->u.push_back(std::move(u));
    }
  }
  std::vector<double> ky(n);
  std::vector<double> kv(n);
  for (std::size_t i = 0; i < n; ++i) {
    ky[i] = mu.key(ys[i]);
    kv[i] = nu.key(vs[i]);
  }
  VerificationReport r;
  r.name = "ip:" + h.name;
  r.info["mu"] = mu.name;
  r.info["nu"] = nu.name;
  r.values["n"] = static_cast<double>(n);
  r.add_test("y_marginal", mu.gof(ys, level));
  r.add_test("v_marginal", nu.gof(vs, level));
  r.add_test("independence", independence_test(ky, kv, {}, level));
  if (keep != nullptr) {
    keep->y = std::move(ys);
    keep->v = std::move(vs);
  }
  return r;
}

// ---------------------------------------------------------------------------
// CSV sample dumps
// ---------------------------------------------------------------------------

inline std::string csv_field(double x) { return to_text(x); }
inline std::string csv_field(std::int64_t x) { return std::to_string(x); }
inline std::string csv_field(const BernoulliUnit& x) { return "\"" + to_text(x) + "\""; }

/// Columns index,x,u,y,v.
template <class X, class U>
void write_samples_csv(std::ostream& os, const IpSamples<X, U>& s) {
  os << "index,x,u,y,v\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    os << i << ',' << csv_field(s.x[i]) << ',' << csv_field(s.u[i]) << ',' << csv_field(s.y[i]) << ','
       << csv_field(s.v[i]) << '\n';
  }
}

/// One row per state X^t, t = 0..T, with the step taken from it: (X^t, U^t,
/// X^{t+1}, V^t). The last row has only x; v is empty without g.
template <class X, class U>
void write_samples_csv(std::ostream& os, const ChainPath<X, U>& p) {
  os << "index,x,u,y,v\n";
  for (std::size_t t = 0; t < p.states.size(); ++t) {
    os << t << ',' << csv_field(p.states[t]) << ',';
    if (t < p.drivers.size()) {
      os << csv_field(p.drivers[t]) << ',' << csv_field(p.states[t + 1]) << ',';
      if (!p.codrivers.empty()) os << csv_field(p.codrivers[t]);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

}  // namespace revip
