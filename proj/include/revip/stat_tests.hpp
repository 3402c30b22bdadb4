#pragma once

// Goodness-of-fit, two-sample, independence and exchangeability tests.
//
// All tests use asymptotic p-values and are pure functions of their inputs.
// Binning rules are data-driven but deterministic: identical inputs always
// produce identical cells and therefore bit-identical results.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "revip/laws.hpp"
#include "revip/report.hpp"
#include "revip/special.hpp"

namespace revip {

/// Minimum expected count per cell after merging.
inline constexpr double kMinExpected = 5.0;

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

namespace detail {

// Stephens' small-sample correction to the limiting distribution.
inline double ks_p_value(double d, double n_eff) {
  const double s = std::sqrt(n_eff);
  return kolmogorov_survival((s + 0.12 + 0.11 / s) * d);
}

}  // namespace detail

inline TestResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                                double level = kLevel, std::size_t min_size = 100) {
  if (a.size() < min_size || b.size() < min_size) {
    throw std::invalid_argument("ks_two_sample: each sample needs at least " +
                                std::to_string(min_size) + " values");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  TestResult t;
  t.method = "ks_two_sample";
  t.statistic = d;
  t.p_value = d == 0.0 ? 1.0 : detail::ks_p_value(d, n * m / (n + m));
  t.n = {x.size(), y.size()};
  t.level = level;
  t.decide();
  return t;
}

/// One-sample KS against a continuous cdf.
template <class Cdf>
TestResult ks_one_sample(std::span<const double> sample, Cdf&& cdf, double level = kLevel) {
  if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  TestResult t;
  t.method = "ks_one_sample";
  t.statistic = d;
  t.p_value = detail::ks_p_value(d, n);
  t.n = {x.size()};
  t.level = level;
  t.decide();
  return t;
}

// ---------------------------------------------------------------------------
// Chi-square goodness of fit
// ---------------------------------------------------------------------------

/// Pearson chi-square against cell probabilities. Adjacent cells are merged
/// left to right until every merged cell has expected count >= 5.
inline TestResult chi2_gof(std::span<const double> counts, std::span<const double> probs,
                           double level = kLevel) {
  if (counts.size() != probs.size()) {
    throw std::invalid_argument("chi2_gof: counts and probs differ in length");
  }
  const double total_p = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total_p - 1.0) > 1e-9) throw std::invalid_argument("chi2_gof: probs must sum to 1");
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);

  TestResult t;
  t.method = "chi2_gof";
  t.n = {static_cast<std::size_t>(n)};
  t.level = level;

  // observed mass on zero-probability cells is an immediate rejection
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0.0 && counts[i] > 0.0) {
      t.statistic = std::numeric_limits<double>::infinity();
      t.p_value = 0.0;
      t.flag = "mass on zero-probability cell";
      t.decide();
      return t;
    }
  }

  std::vector<double> obs;
  std::vector<double> exp;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    o += counts[i];
    e += n * probs[i];
    if (e >= kMinExpected) {
      obs.push_back(o);
      exp.push_back(e);
      o = 0.0;
      e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (exp[i] > 0.0) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  }
  t.statistic = stat;
  t.dof = static_cast<double>(obs.size()) - 1.0;
  t.p_value = obs.size() < 2 ? 1.0 : chi2_survival(stat, t.dof);
  if (obs.size() < 2) t.flag = "single cell after merging";
  t.decide();
  return t;
}

/// Chi-square GOF of integer-valued draws against a discrete law.
inline TestResult chi2_gof_law(std::span<const double> sample, const Law& law, double level = kLevel) {
  if (!law.discrete()) throw std::invalid_argument("chi2_gof_law: law must be discrete");
  std::vector<double> counts;
  std::vector<double> probs;
  if (const auto* tab = std::get_if<FiniteTableLaw>(&law.variant())) {
    counts.assign(tab->values.size() + 1, 0.0);
    probs = tab->probs;
    probs.push_back(0.0);
    for (double x : sample) {
      auto it = std::lower_bound(tab->values.begin(), tab->values.end(), x);
      if (it != tab->values.end() && *it == x) {
        counts[static_cast<std::size_t>(it - tab->values.begin())] += 1.0;
      } else {
        counts.back() += 1.0;
      }
    }
  } else {
    const double lo = support_min(law);
    double hi = lo;
    for (double x : sample) hi = std::max(hi, x);
    const auto cells = static_cast<std::size_t>(hi - lo) + 1;
    counts.assign(cells + 2, 0.0);  // [outside support] [lo .. hi] [> hi]
    probs.assign(cells + 2, 0.0);
    for (double x : sample) {
      if (x < lo || !detail::is_integer(x)) {
        counts.front() += 1.0;
      } else {
        counts[1 + static_cast<std::size_t>(x - lo)] += 1.0;
      }
    }
    for (std::size_t i = 0; i < cells; ++i) probs[1 + i] = density(law, lo + static_cast<double>(i));
    probs.back() = survival(law, hi);
    // absorb rounding so that the cells sum to one
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    probs.back() = std::max(0.0, probs.back() + (1.0 - total));
  }
  return chi2_gof(counts, probs, level);
}

/// Goodness of fit against a law: chi-square for discrete kinds, KS otherwise.
inline TestResult gof_law(std::span<const double> sample, const Law& law, double level = kLevel) {
  if (law.discrete()) return chi2_gof_law(sample, law, level);
  return ks_one_sample(sample, [&](double x) { return cdf(law, x); }, level);
}

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

/// Upper edges of bins: bin i holds values in (edges[i-1], edges[i]], last edge is +inf.
struct Bins {
  std::vector<double> edges;
  bool categorical = false;

  [[nodiscard]] std::size_t size() const { return edges.size(); }
  [[nodiscard]] std::size_t index(double v) const {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
  }
};

/// Data-driven bins. Few distinct values -> ordered categories grouped until each
/// group holds at least `min_count` observations; otherwise `quantile_bins`
/// equal-frequency bins.
inline Bins make_bins(std::span<const double> values, std::size_t quantile_bins, double min_count,
                      std::size_t max_categories = 64) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  Bins bins;
  std::vector<std::pair<double, double>> distinct;
  for (double x : v) {
    if (distinct.empty() || distinct.back().first != x) {
      if (distinct.size() > max_categories) break;
      distinct.emplace_back(x, 0.0);
    }
    distinct.back().second += 1.0;
  }
  if (distinct.size() <= max_categories) {
    bins.categorical = true;
    double acc = 0.0;
    for (const auto& [x, c] : distinct) {
      acc += c;
      if (acc >= min_count) {
        bins.edges.push_back(x);
        acc = 0.0;
      }
    }
    if (bins.edges.empty()) bins.edges.push_back(distinct.back().first);
    bins.edges.back() = std::numeric_limits<double>::infinity();
    return bins;
  }
  const auto n = v.size();
  for (std::size_t i = 1; i < quantile_bins; ++i) {
    const double e = v[(i * n) / quantile_bins - 1];
    if (bins.edges.empty() || e > bins.edges.back()) bins.edges.push_back(e);
  }
  bins.edges.push_back(std::numeric_limits<double>::infinity());
  return bins;
}

// ---------------------------------------------------------------------------
// Independence and exchangeability
// ---------------------------------------------------------------------------

struct IndependenceBinning {
  std::size_t bins = 10;          // quantile bins per margin for continuous data
  double min_marginal = 50.0;     // minimum observed count per marginal bin
  std::size_t min_pairs = 10000;  // sample-size floor
};

/// Chi-square test of independence on the contingency table of (a_i, b_i).
inline TestResult independence_test(std::span<const double> a, std::span<const double> b,
                                    const IndependenceBinning& binning = {}, double level = kLevel) {
  if (a.size() != b.size()) throw std::invalid_argument("independence_test: length mismatch");
  if (a.size() < binning.min_pairs) {
    throw std::invalid_argument("independence_test: needs at least " +
                                std::to_string(binning.min_pairs) + " pairs");
  }
  TestResult t;
  t.method = "chi2_independence";
  t.n = {a.size()};
  t.level = level;
  const Bins ba = make_bins(a, binning.bins, binning.min_marginal);
  const Bins bb = make_bins(b, binning.bins, binning.min_marginal);
  if (ba.size() < 2 || bb.size() < 2) {
    t.flag = "degenerate marginal";
    t.p_value = 1.0;
    t.decide();
    return t;
  }
  const std::size_t rows = ba.size();
  const std::size_t cols = bb.size();
  std::vector<double> table(rows * cols, 0.0);
  std::vector<double> rsum(rows, 0.0);
  std::vector<double> csum(cols, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto r = ba.index(a[i]);
    const auto c = bb.index(b[i]);
    table[r * cols + c] += 1.0;
    rsum[r] += 1.0;
    csum[c] += 1.0;
  }
  const auto n = static_cast<double>(a.size());
  double stat = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = rsum[r] * csum[c] / n;
      if (e > 0.0) stat += (table[r * cols + c] - e) * (table[r * cols + c] - e) / e;
    }
  }
  t.statistic = stat;
  t.dof = static_cast<double>((rows - 1) * (cols - 1));
  t.p_value = chi2_survival(stat, t.dof);
  t.decide();
  return t;
}

/// Split-half exchangeability test for pairs (a_i, b_i).
///
/// The first half is kept as (a, b) and the second half is swapped to (b, a);
/// a chi-square homogeneity test then compares the two halves on a common 2-D
/// grid built from the pooled values of both coordinates.
inline TestResult exchangeability_test(std::span<const double> a, std::span<const double> b,
                                       std::size_t bins = 10, std::size_t min_pairs = 20000,
                                       double level = kLevel) {
  if (a.size() != b.size()) throw std::invalid_argument("exchangeability_test: length mismatch");
  if (a.size() < min_pairs) {
    throw std::invalid_argument("exchangeability_test: needs at least " + std::to_string(min_pairs) +
                                " pairs");
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const Bins grid = make_bins(pooled, bins, static_cast<double>(pooled.size()) / (4.0 * static_cast<double>(bins)));
  const std::size_t k = grid.size();
  const std::size_t half = a.size() / 2;
  std::vector<double> c1(k * k, 0.0);
  std::vector<double> c2(k * k, 0.0);
  for (std::size_t i = 0; i < half; ++i) c1[grid.index(a[i]) * k + grid.index(b[i])] += 1.0;
  for (std::size_t i = half; i < 2 * half; ++i) c2[grid.index(b[i]) * k + grid.index(a[i])] += 1.0;

  // pool sparse cells into a single remainder cell
  const auto n1 = static_cast<double>(half);
  const auto n2 = static_cast<double>(half);
  const double n = n1 + n2;
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> rest{0.0, 0.0};
  for (std::size_t i = 0; i < k * k; ++i) {
    const double tot = c1[i] + c2[i];
    if (tot == 0.0) continue;
    if (std::min(n1, n2) * tot / n >= kMinExpected) {
      cells.emplace_back(c1[i], c2[i]);
    } else {
      rest.first += c1[i];
      rest.second += c2[i];
    }
  }
  if (rest.first + rest.second > 0.0) cells.push_back(rest);
  double stat = 0.0;
  for (const auto& [o1, o2] : cells) {
    const double tot = o1 + o2;
    const double e1 = n1 * tot / n;
    const double e2 = n2 * tot / n;
    stat += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
  }
  TestResult t;
  t.method = "split_half_exchangeability";
  t.statistic = stat;
  t.dof = static_cast<double>(cells.size()) - 1.0;
  t.p_value = cells.size() < 2 ? 1.0 : chi2_survival(stat, t.dof);
  t.n = {half, half};
  t.level = level;
  t.decide();
  return t;
}

/// Sign test of exchangeability for i.i.d. pairs: #{a<b} ~ Bin(#non-ties, 1/2).
inline TestResult sign_exchangeability_test(std::span<const double> a, std::span<const double> b,
                                            double level = kLevel) {
  if (a.size() != b.size()) throw std::invalid_argument("sign_exchangeability_test: length mismatch");
  std::size_t up = 0;
  std::size_t moves = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    ++moves;
    if (a[i] < b[i]) ++up;
  }
  TestResult t;
  t.method = "sign_exchangeability";
  t.statistic = static_cast<double>(up);
  t.p_value = binomial_half_two_sided(up, moves);
  t.n = {a.size(), moves};
  t.level = level;
  t.decide();
  return t;
}

/// Bonferroni combination of a family of (possibly dependent) tests.
inline TestResult bonferroni(const std::vector<TestResult>& family, const std::string& method,
                             double level = kLevel) {
  TestResult t;
  t.method = method;
  t.level = level;
  double min_p = 1.0;
  std::size_t total = 0;
  for (const auto& r : family) {
    min_p = std::min(min_p, r.p_value);
    for (auto k : r.n) total += k;
  }
  t.statistic = min_p;
  t.dof = static_cast<double>(family.size());
  t.p_value = std::min(1.0, min_p * static_cast<double>(family.size()));
  t.n = {family.size(), total};
  t.decide();
  return t;
}

}  // namespace revip
