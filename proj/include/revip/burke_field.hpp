#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "revip/involutions.hpp"
#include "revip/kernels.hpp"
#include "revip/report.hpp"
#include "revip/rng.hpp"
#include "revip/stat_tests.hpp"

namespace revip {

/// Finite piece of the lattice field built by H from the bottom row and the
/// left column. Vertex (n, t), 1 <= n <= N, 0 <= t < T, maps its inputs
/// (X[n][t], U[n-1][t]) to (X[n][t+1], U[n][t]).
template <class X, class U>
struct LatticeField {
  std::size_t n_cols = 0;  // N
  std::size_t n_rows = 0;  // T
  std::vector<X> xs;       // n in 1..N, t in 0..T
  std::vector<U> us;       // n in 0..N, t in 0..T-1
  Involution<X, U> h;
  Distribution<X> mu;
  Distribution<U> nu;

  [[nodiscard]] X& x(std::size_t n, std::size_t t) { return xs[(n - 1) * (n_rows + 1) + t]; }
  [[nodiscard]] const X& x(std::size_t n, std::size_t t) const { return xs[(n - 1) * (n_rows + 1) + t]; }
  [[nodiscard]] U& u(std::size_t n, std::size_t t) { return us[n * n_rows + t]; }
  [[nodiscard]] const U& u(std::size_t n, std::size_t t) const { return us[n * n_rows + t]; }
};

/// Bottom row i.i.d. mu, left column i.i.d. `boundary_nu` (nu unless given).
template <class X, class U>
LatticeField<X, U> simulate_field(const Involution<X, U>& h, const Distribution<X>& mu, const Distribution<U>& nu,
                                  std::size_t n_cols, std::size_t n_rows, Stream& rng,
                                  const std::optional<Distribution<U>>& boundary_nu = std::nullopt) {
  if (n_cols < 1 || n_rows < 1) throw std::invalid_argument("simulate_field: need N, T >= 1");
  LatticeField<X, U> fld;
  fld.n_cols = n_cols;
  fld.n_rows = n_rows;
  fld.h = h;
  fld.mu = mu;
  fld.nu = nu;
  fld.xs.resize(n_cols * (n_rows + 1));
  fld.us.resize((n_cols + 1) * n_rows);
  Stream x_rng = rng.split(11);
  Stream u_rng = rng.split(12);
  const Distribution<U>& left = boundary_nu ? *boundary_nu : nu;
  for (std::size_t n = 1; n <= n_cols; ++n) fld.x(n, 0) = mu.sample(x_rng);
  for (std::size_t t = 0; t < n_rows; ++t) fld.u(0, t) = left.sample(u_rng);
  for (std::size_t t = 0; t < n_rows; ++t) {
    for (std::size_t n = 1; n <= n_cols; ++n) {
      try {
        auto [y, v] = apply(h, fld.x(n, t), fld.u(n - 1, t));
        fld.x(n, t + 1) = std::move(y);
        fld.u(n, t) = std::move(v);
      } catch (const DomainError& e) {
        throw DomainError("simulate_field: at (n,t)=(" + std::to_string(n) + "," + std::to_string(t) +
                          "): " + e.what());
      }
    }
  }
  return fld;
}

/// Largest deviation from the recursion over all vertices.
template <class X, class U>
double field_recursion_deviation(const LatticeField<X, U>& fld) {
  double worst = 0.0;
  for (std::size_t t = 0; t < fld.n_rows; ++t) {
    for (std::size_t n = 1; n <= fld.n_cols; ++n) {
      const X& x = fld.x(n, t);
      const U& u = fld.u(n - 1, t);
      worst = std::max(worst, deviation(fld.h.f(x, u), fld.x(n, t + 1)));
      worst = std::max(worst, deviation(fld.h.g(x, u), fld.u(n, t)));
    }
  }
  return worst;
}

struct BurkeOptions {
  double level = kLevel;
  /// Anti-diagonals with fewer vertices are skipped.
  std::size_t min_diagonal = 30;
  double noise_tail = 1e-12;
};

namespace detail {

/// Chi-square test of i.i.d. integer pairs against mu(x) K(x, y), with K
/// enumerated from the noise table.
template <class F>
TestResult pair_law_gof(const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, const Law& mu,
                        const Law& noise, F&& f, double tail, double level) {
  const NoiseTable xs = noise_table(mu, tail);
  const NoiseTable us = noise_table(noise, tail);
  std::map<std::pair<std::int64_t, std::int64_t>, double> probs;
  for (std::size_t i = 0; i < xs.values.size(); ++i) {
    for (std::size_t j = 0; j < us.values.size(); ++j) {
      probs[{xs.values[i], f(xs.values[i], us.values[j])}] += xs.probs[i] * us.probs[j];
    }
  }
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> index;
  std::vector<double> p;
  double total = 0.0;
  for (const auto& [cell, w] : probs) {
    index[cell] = p.size();
    p.push_back(w);
    total += w;
  }
  p.push_back(std::max(0.0, 1.0 - total));  // everything else
  std::vector<double> counts(p.size(), 0.0);
  for (const auto& c : pairs) {
    const auto it = index.find(c);
    counts[it == index.end() ? p.size() - 1 : it->second] += 1.0;
  }
  for (double& w : p) w /= total + p.back();
  return chi2_gof(counts, p, level);
}

}  // namespace detail

/// Burke's property on a finite field, each family at `level`:
///  rows_gof          X along each row i.i.d. mu: GOF per row, Bonferroni over rows;
///  rows_independence lag-1 independence along each row, Bonferroni over rows;
///  column_transitions pairs (X^t, X^{t+1}) at the vertices of one anti-diagonal are
///                    i.i.d. mu(x)K(x,y): chi-square (discrete) or sign test of
///                    exchangeability (continuous), Bonferroni over anti-diagonals;
///  u_columns_gof     U along each column of edges i.i.d. nu, Bonferroni over columns;
///  u_duality         pairs (U_in, U_out) at the vertices of one anti-diagonal are
///                    exchangeable, Bonferroni over anti-diagonals.
template <class X, class U>
VerificationReport verify_burke(const LatticeField<X, U>& fld, const BurkeOptions& opt = {}) {
  if (fld.n_cols < 30 || fld.n_rows < 30) throw std::invalid_argument("verify_burke: need N, T >= 30");
  VerificationReport r;
  r.name = "burke:" + fld.h.name;
  r.info["mu"] = fld.mu.name;
  r.info["nu"] = fld.nu.name;
  r.values["N"] = static_cast<double>(fld.n_cols);
  r.values["T"] = static_cast<double>(fld.n_rows);
  const double dev = field_recursion_deviation(fld);
  r.values["recursion_deviation"] = dev;
  r.require(dev <= default_involution_tolerance(fld.h.x_space), "field violates its recursion");

  const std::size_t N = fld.n_cols;
  const std::size_t T = fld.n_rows;
  std::vector<TestResult> rows_gof;
  std::vector<TestResult> rows_ind;
  for (std::size_t t = 0; t <= T; ++t) {
    std::vector<X> row;
    std::vector<double> keys;
    for (std::size_t n = 1; n <= N; ++n) {
      row.push_back(fld.x(n, t));
      keys.push_back(fld.mu.key(fld.x(n, t)));
    }
    rows_gof.push_back(fld.mu.gof(row, opt.level));
    const std::vector<double> a(keys.begin(), keys.end() - 1);
    const std::vector<double> b(keys.begin() + 1, keys.end());
    IndependenceBinning binning{2, 0.4 * static_cast<double>(a.size()), 0};
    rows_ind.push_back(independence_test(a, b, binning, opt.level));
  }
  r.add_test("rows_gof", bonferroni(rows_gof, "bonferroni(row gof)", opt.level));
  r.add_test("rows_independence", bonferroni(rows_ind, "bonferroni(row lag-1 independence)", opt.level));

  // vertex (n, t) lies on anti-diagonal c = n + t
  std::vector<TestResult> col_tests;
  std::vector<TestResult> dual_tests;
  for (std::size_t c = 1; c <= N + T - 1; ++c) {
    std::vector<std::pair<X, X>> xpairs;
    std::vector<double> u_in;
    std::vector<double> u_out;
    for (std::size_t n = 1; n <= N; ++n) {
      if (c < n || c - n >= T) continue;
      const std::size_t t = c - n;
      xpairs.emplace_back(fld.x(n, t), fld.x(n, t + 1));
      u_in.push_back(fld.nu.key(fld.u(n - 1, t)));
      u_out.push_back(fld.nu.key(fld.u(n, t)));
    }
    if (xpairs.size() < opt.min_diagonal) continue;
    if constexpr (std::is_same_v<X, std::int64_t> && std::is_same_v<U, std::int64_t>) {
      if (fld.mu.law && fld.nu.law && fld.mu.law->discrete() && fld.nu.law->discrete()) {
        col_tests.push_back(
            detail::pair_law_gof(xpairs, *fld.mu.law, *fld.nu.law, fld.h.f, opt.noise_tail, opt.level));
      }
    }
    if (col_tests.size() < dual_tests.size() + 1) {
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& [x0, x1] : xpairs) {
        a.push_back(fld.mu.key(x0));
        b.push_back(fld.mu.key(x1));
      }
      col_tests.push_back(sign_exchangeability_test(a, b, opt.level));
    }
    dual_tests.push_back(sign_exchangeability_test(u_in, u_out, opt.level));
  }
  r.add_test("column_transitions", bonferroni(col_tests, "bonferroni(anti-diagonal transitions)", opt.level));
  r.add_test("u_duality", bonferroni(dual_tests, "bonferroni(anti-diagonal U exchangeability)", opt.level));

  std::vector<TestResult> u_cols;
  for (std::size_t n = 0; n <= N; ++n) {
    std::vector<U> col;
    for (std::size_t t = 0; t < T; ++t) col.push_back(fld.u(n, t));
    u_cols.push_back(fld.nu.gof(col, opt.level));
  }
  r.add_test("u_columns_gof", bonferroni(u_cols, "bonferroni(U column gof)", opt.level));
  return r;
}

/// Columns n,t,x,u; x is empty where the site has no X value (n = 0) and u is
/// empty on the top row.
template <class X, class U>
void write_field_csv(std::ostream& os, const LatticeField<X, U>& fld) {
  os << "n,t,x,u\n";
  for (std::size_t n = 0; n <= fld.n_cols; ++n) {
    for (std::size_t t = 0; t <= fld.n_rows; ++t) {
      os << n << ',' << t << ',';
      if (n >= 1) os << csv_field(fld.x(n, t));
      os << ',';
      if (t < fld.n_rows) os << csv_field(fld.u(n, t));
      os << '\n';
    }
  }
}

}  // namespace revip
