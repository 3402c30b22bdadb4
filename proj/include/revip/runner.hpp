#pragma once

// Configuration-driven runner. Needs yaml-cpp; everything else in the library
// is header-only.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "revip/augmentation.hpp"
#include "revip/burke_field.hpp"
#include "revip/exact_discrete.hpp"
#include "revip/expr.hpp"
#include "revip/involutions.hpp"
#include "revip/kernels.hpp"
#include "revip/laws.hpp"
#include "revip/report.hpp"
#include "revip/rng.hpp"
#include "revip/skorokhod.hpp"

namespace revip {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration, located by line and column (1-based).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, const YAML::Mark& mark)
      : std::runtime_error(mark.is_null() ? msg
                                          : "line " + std::to_string(mark.line + 1) + ", column " +
                                                std::to_string(mark.column + 1) + ": " + msg) {}
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RunContext {
  std::optional<std::filesystem::path> out_dir;
  bool timing = false;
};

/// One validated stanza, ready to run.
struct CompiledCheck {
  std::string kind;
  std::string name;
  nlohmann::json inputs;
  bool expect_pass = true;
  std::function<VerificationReport(Stream&, const RunContext&)> run;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::vector<CompiledCheck> checks;
};

namespace config_detail {

// ---------------------------------------------------------------------------
// YAML access with located errors
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = to_json(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& v : n) j.push_back(to_json(v));
      return j;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      std::int64_t i = 0;
      if (YAML::convert<std::int64_t>::decode(n, i)) return i;
      double d = 0.0;
      if (YAML::convert<double>::decode(n, d)) return d;
      bool b = false;
      if (YAML::convert<bool>::decode(n, b)) return b;
      return s;
    }
    default: return nullptr;
  }
}

inline void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where, kv.first.Mark());
  }
}

inline YAML::Node require(const YAML::Node& n, const std::string& key, const std::string& where) {
  const YAML::Node v = n[key];
  if (!v) throw ConfigError("missing key '" + key + "' in " + where, n.Mark());
  return v;
}

template <class T>
T scalar(const YAML::Node& v, const std::string& what) {
  if (!v.IsScalar()) throw ConfigError(what + " must be a scalar", v.Mark());
  T out{};
  if (!YAML::convert<T>::decode(v, out)) throw ConfigError(what + " has the wrong type", v.Mark());
  return out;
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const T& fallback) {
  const YAML::Node v = n[key];
  return v ? scalar<T>(v, "'" + key + "'") : fallback;
}

template <class T>
T need(const YAML::Node& n, const std::string& key, const std::string& where) {
  return scalar<T>(require(n, key, where), "'" + key + "'");
}

inline std::int64_t positive(const YAML::Node& n, const std::string& key, std::int64_t fallback) {
  const auto v = get<std::int64_t>(n, key, fallback);
  if (v <= 0) throw ConfigError("'" + key + "' must be positive", n[key] ? n[key].Mark() : n.Mark());
  return v;
}

inline Params params_of(const YAML::Node& n, const std::string& key) {
  Params p;
  const YAML::Node v = n[key];
  if (!v) return p;
  if (!v.IsMap()) throw ConfigError("'" + key + "' must be a mapping", v.Mark());
  for (const auto& kv : v) p[kv.first.as<std::string>()] = scalar<double>(kv.second, "parameter");
  return p;
}

// ---------------------------------------------------------------------------
// Laws
// ---------------------------------------------------------------------------

inline Law parse_law(const YAML::Node& n, const std::string& where) {
  if (!n.IsMap()) throw ConfigError(where + " must be a mapping {kind, params}", n.Mark());
  check_keys(n, {"kind", "params", "values", "probs"}, where);
  const auto kind = need<std::string>(n, "kind", where);
  try {
    if (kind == "FiniteTable") {
      return Law::finite_table(require(n, "values", where).as<std::vector<double>>(),
                               require(n, "probs", where).as<std::vector<double>>());
    }
    return make_law(kind, params_of(n, "params"));
  } catch (const YAML::Exception& e) {
    throw ConfigError(where + ": " + e.what(), n.Mark());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what(), n.Mark());
  }
}

template <class T>
struct is_spd : std::false_type {};
template <int D>
struct is_spd<SpdMatrix<D>> : std::true_type {};

/// Law on the value type T from a config node.
template <class T>
Distribution<T> parse_distribution(const YAML::Node& n, const std::string& where) {
  if constexpr (std::is_same_v<T, BernoulliUnit>) {
    if (!n.IsMap()) throw ConfigError(where + " must be a mapping {kind, params}", n.Mark());
    check_keys(n, {"kind", "params"}, where);
    if (need<std::string>(n, "kind", where) != "BernoulliUnit") {
      throw ConfigError(where + ": this map needs a law of kind BernoulliUnit {p, a, b}", n.Mark());
    }
    const Params p = params_of(n, "params");
    auto val = [&](const char* k, double d) { return p.contains(k) ? p.at(k) : d; };
    try {
      return bernoulli_unit(val("p", 0.5), Law::beta(val("a", 1.0), val("b", 1.0)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what(), n.Mark());
    }
  } else if constexpr (is_spd<T>::value) {
    throw ConfigError(where + ": statistical checks are not available for SPD maps", n.Mark());
  } else {
    const Law law = parse_law(n, where);
    if constexpr (std::is_same_v<T, std::int64_t>) {
      if (!law.discrete()) throw ConfigError(where + ": integer-valued map needs a discrete law", n.Mark());
    } else {
      if (law.discrete()) throw ConfigError(where + ": real-valued map needs a continuous law", n.Mark());
    }
    return from_law<T>(law);
  }
}

// ---------------------------------------------------------------------------
// Probe points
// ---------------------------------------------------------------------------

inline Law default_point_law(const Space& s) {
  switch (s.kind) {
    case SpaceKind::PositiveReal: return Law::gamma(1.0, 1.0);
    case SpaceKind::UnitInterval: return Law::uniform_unit();
    default: return Law::normal(0.0, 4.0);
  }
}

template <class T>
T sample_point(const Space& s, Stream& rng) {
  if constexpr (std::is_same_v<T, double>) {
    return sample(default_point_law(s), rng);
  } else if constexpr (std::is_same_v<T, BernoulliUnit>) {
    const int coin = rng.uniform() < 0.5 ? 1 : 0;
    return BernoulliUnit{coin, rng.uniform()};
  } else {
    static_assert(is_spd<T>::value, "sample_point: unsupported type");
    return random_spd<T::RowsAtCompileTime>(rng);
  }
}

/// Exhaustive box for integer spaces, n random points otherwise.
template <class X, class U>
std::vector<std::pair<X, U>> probe_points(const Space& xs, const Space& us, std::int64_t box, std::size_t n,
                                          Stream& rng) {
  std::vector<std::pair<X, U>> pts;
  if constexpr (std::is_same_v<X, std::int64_t> && std::is_same_v<U, std::int64_t>) {
    (void)n;
    (void)rng;
    for (std::int64_t x = -box; x <= box; ++x) {
      for (std::int64_t u = -box; u <= box; ++u) {
        if (contains(xs, x) && contains(us, u)) pts.emplace_back(x, u);
      }
    }
  } else {
    (void)box;
    Stream xr = rng.split(21);
    Stream ur = rng.split(22);
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(sample_point<X>(xs, xr), sample_point<U>(us, ur));
  }
  return pts;
}

template <class Vis>
auto visit_map(const YAML::Node& stanza, const std::string& where, Vis&& vis) {
  const YAML::Node map_node = require(stanza, "map", where);
  const auto name = scalar<std::string>(map_node, "'map'");
  AnyInvolution h = catalog::matsumoto_yor();
  try {
    h = catalog_get(name, params_of(stanza, "params"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), map_node.Mark());
  }
  return std::visit(std::forward<Vis>(vis), h);
}

inline std::filesystem::path output_path(const RunContext& ctx, const std::string& file) {
  return ctx.out_dir ? *ctx.out_dir / file : std::filesystem::path(file);
}

inline void write_text(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  body(os);
}

// ---------------------------------------------------------------------------
// Stanza compilers
// ---------------------------------------------------------------------------

using Runner = std::function<VerificationReport(Stream&, const RunContext&)>;

inline Runner compile_involution(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "map", "params", "box", "n", "tolerance"}, where);
  const auto box = positive(s, "box", 20);
  const auto n = static_cast<std::size_t>(positive(s, "n", 100000));
  const auto tol = get<double>(s, "tolerance", -1.0);
  return visit_map(s, where, [=](auto h) -> Runner {
    using H = decltype(h);
    using X = typename H::state_type;
    using U = typename H::noise_type;
    const double t = tol >= 0.0 ? tol
                                : (h.name == "gaussian_rosenblatt" ? 1e-8 : default_involution_tolerance(h.x_space));
    return [=](Stream& rng, const RunContext&) {
      auto pts = probe_points<X, U>(h.x_space, h.u_space, box, n, rng);
      if constexpr (std::is_same_v<X, double>) {
        // states from the stationary law N(0, sigma^2 / (1 - beta^2))
        if (h.params.contains("beta") && h.params.contains("sigma")) {
          const double b = h.params.at("beta");
          const double sd = h.params.at("sigma") / std::sqrt(1.0 - b * b);
          Stream xr = rng.split(23);
          for (auto& pt : pts) pt.first = sd * xr.normal();
        }
      }
      return check_involution<X, U>(h, pts, t);
    };
  });
}

template <class X, class U>
std::optional<Involution<X, U>> catalog_counterpart(const std::string& name) {
  try {
    auto any = catalog_get(name, {});
    if (auto* h = std::get_if<Involution<X, U>>(&any)) return *h;
  } catch (const std::invalid_argument&) {
  }
  return std::nullopt;
}

template <class X, class U>
Runner hypotheses_runner(FSpec<X, U> spec, std::optional<Involution<X, U>> reference, std::int64_t box,
                         std::size_t n) {
  return [=](Stream& rng, const RunContext&) {
    const auto pts = probe_points<X, U>(spec.x_space, spec.u_space, box, n, rng);
    VerificationReport r = verify_hypotheses<X, U>(spec, pts);
    if (r.pass) {
      const auto aug = augment(spec);
      double worst = 0.0;
      double ffu = 0.0;
      for (const auto& [x, u] : pts) {
        const U v = aug.g(x, u);
        ffu = std::max(ffu, deviation(spec.f(spec.f(x, u), v), x));
        if (reference) worst = std::max(worst, deviation(v, reference->g(x, u)));
      }
      r.values["max_f_of_f_deviation"] = ffu;
      r.require(ffu <= std::max(default_involution_tolerance(spec.x_space), 1e-9) * 10.0,
                "f(f(x,u), g(x,u)) differs from x");
      if (reference) {
        r.values["max_g_deviation_vs_catalog"] = worst;
        r.require(worst <= default_involution_tolerance(spec.x_space), "augmented g differs from catalog g");
      }
    }
    return r;
  };
}

inline Runner compile_hypotheses(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "map", "params", "f", "x_space", "u_space", "u_lo", "u_hi", "box", "n"},
             where);
  const auto box = positive(s, "box", 20);
  const auto n = static_cast<std::size_t>(positive(s, "n", 10000));
  if (s["f"]) {
    const YAML::Node fnode = s["f"];
    std::optional<Expr> expr;
    try {
      expr = Expr::parse(scalar<std::string>(fnode, "'f'"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), fnode.Mark());
    }
    auto space = [&](const char* key) {
      const YAML::Node v = require(s, key, where);
      try {
        const Space sp{space_kind_from_string(scalar<std::string>(v, key))};
        if (sp.kind != SpaceKind::PositiveReal && sp.kind != SpaceKind::UnitInterval &&
            sp.kind != SpaceKind::RealLine) {
          throw std::invalid_argument("user maps need a real space");
        }
        return sp;
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), v.Mark());
      }
    };
    const Space xs = space("x_space");
    const Space us = space("u_space");
    MonotoneOptions opt;
    opt.u_lo = get<double>(s, "u_lo", us.kind == SpaceKind::RealLine ? -std::numeric_limits<double>::infinity() : 0.0);
    opt.u_hi = get<double>(s, "u_hi", us.kind == SpaceKind::UnitInterval ? 1.0 : std::numeric_limits<double>::infinity());
    if (xs.kind == SpaceKind::UnitInterval) opt.x_probes = {0.1, 0.3, 0.5, 0.7, 0.9};
    if (xs.kind == SpaceKind::RealLine) opt.x_probes = {-3.0, -1.0, 0.0, 1.0, 3.0};
    FSpec<double, double> spec;
    try {
      const Expr e = *expr;
      spec = make_monotone_fspec("user:" + e.text(), xs, us, [e](double x, double u) { return e(x, u); }, opt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), fnode.Mark());
    }
    return hypotheses_runner<double, double>(spec, std::nullopt, box, n);
  }
  const YAML::Node map_node = require(s, "map", where);
  const auto name = scalar<std::string>(map_node, "'map'");
  const Params prm = params_of(s, "params");
  try {
    if (name == "matsumoto_yor") {
      return hypotheses_runner(fspecs::matsumoto_yor(), catalog_counterpart<double, double>(name), box, n);
    }
    if (name == "swapped_matsumoto_yor") {
      return hypotheses_runner(fspecs::swapped_matsumoto_yor(), catalog_counterpart<double, double>(name), box, n);
    }
    if (name == "beta_map") {
      return hypotheses_runner(fspecs::beta_map(), catalog_counterpart<double, double>(name), box, n);
    }
    if (name == "beta_walk") {
      return hypotheses_runner(fspecs::beta_walk(), catalog_counterpart<double, BernoulliUnit>(name), box, n);
    }
    if (name == "reflecting_rw") {
      return hypotheses_runner(fspecs::reflecting_rw(), catalog_counterpart<std::int64_t, std::int64_t>(name), box,
                               n);
    }
    if (name == "kdv") {
      return hypotheses_runner(fspecs::kdv(), std::optional<Involution<std::int64_t, std::int64_t>>{}, box, n);
    }
    if (name == "gaussian") {
      auto need = [&](const char* k) {
        if (!prm.contains(k)) throw std::invalid_argument(std::string("gaussian: missing parameter '") + k + "'");
        return prm.at(k);
      };
      const double beta = need("beta");
      const double sigma = need("sigma");
      return hypotheses_runner(fspecs::gaussian(beta, sigma),
                               std::optional{catalog::gaussian_rosenblatt(beta, sigma)}, box, n);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), map_node.Mark());
  }
  throw ConfigError("unknown f-spec '" + name +
                        "' (known: matsumoto_yor, swapped_matsumoto_yor, beta_map, beta_walk, reflecting_rw, kdv, "
                        "gaussian; or give 'f')",
                    map_node.Mark());
}

inline Runner compile_reversibility(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "map", "params", "noise", "mu", "n"}, where);
  const auto n = static_cast<std::size_t>(positive(s, "n", 200000));
  if (n < 10000) throw ConfigError("'n' must be at least 10000", s["n"].Mark());
  return visit_map(s, where, [&](auto h) -> Runner {
    using H = decltype(h);
    using X = typename H::state_type;
    using U = typename H::noise_type;
    if constexpr (is_spd<X>::value) {
      throw ConfigError("reversibility checks are not available for SPD maps", s["map"].Mark());
    } else {
      const auto mu = parse_distribution<X>(require(s, "mu", where), "'mu'");
      const auto noise = parse_distribution<U>(require(s, "noise", where), "'noise'");
      const auto k = make_kernel(h, noise);
      return [=](Stream& rng, const RunContext&) { return check_reversibility_statistical(k, mu, n, rng); };
    }
  });
}

inline Runner compile_ip(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "map", "params", "mu", "nu", "n", "csv"}, where);
  const auto n = static_cast<std::size_t>(positive(s, "n", 200000));
  const auto csv = get<std::string>(s, "csv", std::string());
  return visit_map(s, where, [&](auto h) -> Runner {
    using H = decltype(h);
    using X = typename H::state_type;
    using U = typename H::noise_type;
    if constexpr (is_spd<X>::value) {
      throw ConfigError("statistical IP checks are not available for SPD maps", s["map"].Mark());
    } else {
      const auto mu = parse_distribution<X>(require(s, "mu", where), "'mu'");
      const auto nu = parse_distribution<U>(require(s, "nu", where), "'nu'");
      return [=](Stream& rng, const RunContext& ctx) {
        IpSamples<X, U> keep;
        auto r = check_ip_statistical(h, mu, nu, n, rng, kLevel, csv.empty() ? nullptr : &keep);
        if (!csv.empty()) {
          const auto path = output_path(ctx, csv);
          write_text(path, [&](std::ostream& os) { write_samples_csv(os, keep); });
          r.info["csv"] = csv;
        }
        return r;
      };
    }
  });
}

inline Runner compile_detailed_balance(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "map", "params", "noise", "mu", "lo", "hi", "tolerance"}, where);
  const auto lo = get<std::int64_t>(s, "lo", std::int64_t{0});
  const auto hi = get<std::int64_t>(s, "hi", std::int64_t{200});
  if (hi < lo) throw ConfigError("'hi' must not be below 'lo'", s.Mark());
  DetailedBalanceOptions opt;
  opt.tolerance = get<double>(s, "tolerance", -1.0);
  return visit_map(s, where, [&](auto h) -> Runner {
    using H = decltype(h);
    using X = typename H::state_type;
    using U = typename H::noise_type;
    if constexpr (!std::is_same_v<X, std::int64_t> || !std::is_same_v<U, std::int64_t>) {
      throw ConfigError("detailed-balance needs an integer map", s["map"].Mark());
    } else {
      const auto noise = parse_distribution<U>(require(s, "noise", where), "'noise'");
      const Law mu = parse_law(require(s, "mu", where), "'mu'");
      if (!mu.discrete()) throw ConfigError("'mu' must be discrete", s["mu"].Mark());
      const auto k = make_kernel(h, noise);
      return [=](Stream&, const RunContext&) { return check_detailed_balance_exact(k, mu, lo, hi, opt); };
    }
  });
}

inline Runner compile_rrw(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "p", "q", "r", "pprime", "box", "exact", "perturbations", "necessity"},
             where);
  RRWParams prm;
  prm.p = need<double>(s, "p", where);
  prm.q = need<double>(s, "q", where);
  prm.r = need<double>(s, "r", where);
  prm.pprime = get<double>(s, "pprime", -1.0);
  const auto box = positive(s, "box", 200);
  const bool exact = get<bool>(s, "exact", true);
  const bool perturbations = get<bool>(s, "perturbations", true);
  const bool necessity = get<bool>(s, "necessity", false);
  Law forced = Law::uniform_unit();
  try {
    forced = rrw_forced_law(prm);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), s.Mark());
  }
  return [=](Stream&, const RunContext&) {
    VerificationReport r;
    if (exact) {
      r = rrw_verify_proof_identities(rrw_forced_table<Rational>(prm, box), prm);
    } else {
      r = rrw_verify_proof_identities(rrw_forced_table<double>(prm, box), prm);
    }
    if (perturbations) {
      // move 1e-3 of mass between every ordered pair of states in {0..4}
      const auto table = rrw_forced_table<double>(prm, box);
      const double eps = 1e-3;
      double smallest = 1.0;
      std::size_t tried = 0;
      for (std::int64_t from = 0; from <= 4; ++from) {
        if (table.p[static_cast<std::size_t>(from)] < eps) continue;
        for (std::int64_t to = 0; to <= 4; ++to) {
          if (to == from) continue;
          const double d = product_defect_tv(rrw_joint_table(perturb(table, from, to, eps), prm));
          r.values["perturbed_defect_" + std::to_string(from) + "_to_" + std::to_string(to)] = d;
          smallest = std::min(smallest, d);
          ++tried;
        }
      }
      r.values["perturbations"] = static_cast<double>(tried);
      r.values["smallest_perturbed_defect"] = smallest;
      r.require(tried > 0 && smallest > 1e-6, "a perturbed law still makes Y and V independent");
    }
    r.name = "rrw_characterize";
    r.info["forced_law"] = forced.name();
    std::vector<double> pmf;
    for (std::int64_t k = 0; k <= std::min<std::int64_t>(box, 30); ++k) pmf.push_back(density(forced, static_cast<double>(k)));
    r.series["forced_pmf_0_to_30"] = pmf;
    if (necessity) {
      const auto feas = rrw_feasibility(prm, box);
      r.values["feasibility_best_score"] = feas.best_score;
      r.values["feasibility_best_pprime"] = feas.best_pprime;
      r.info["feasible"] = feas.feasible ? "true" : "false";
    }
    return r;
  };
}

inline Runner compile_kdv(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "theta", "ell", "M", "max_tail"}, where);
  const auto theta = need<double>(s, "theta", where);
  const auto ell = need<std::int64_t>(s, "ell", where);
  const auto m = positive(s, "M", 60);
  const auto max_tail = get<double>(s, "max_tail", 1e-12);
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("'theta' must lie in (0,1)", s["theta"].Mark());
  if (ell < 2 || ell % 2 != 0) throw ConfigError("'ell' must be a positive even integer", s["ell"].Mark());
  if (std::pow(theta, static_cast<double>(m + 1 + ell)) > max_tail) {
    throw ConfigError("tail bound theta^(M+1+ell) exceeds max_tail; increase M", s.Mark());
  }
  return [=](Stream&, const RunContext&) { return kdv_dichotomy_report(theta, ell, m, max_tail); };
}

inline Runner compile_burke(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "map", "params", "mu", "nu", "boundary_nu", "N", "T", "csv"}, where);
  const auto cols = static_cast<std::size_t>(positive(s, "N", 50));
  const auto rows = static_cast<std::size_t>(positive(s, "T", 50));
  if (cols < 30 || rows < 30) throw ConfigError("'N' and 'T' must be at least 30", s.Mark());
  const auto csv = get<std::string>(s, "csv", std::string());
  return visit_map(s, where, [&](auto h) -> Runner {
    using H = decltype(h);
    using X = typename H::state_type;
    using U = typename H::noise_type;
    if constexpr (is_spd<X>::value) {
      throw ConfigError("burke checks are not available for SPD maps", s["map"].Mark());
    } else {
      const auto mu = parse_distribution<X>(require(s, "mu", where), "'mu'");
      const auto nu = parse_distribution<U>(require(s, "nu", where), "'nu'");
      std::optional<Distribution<U>> boundary;
      if (s["boundary_nu"]) boundary = parse_distribution<U>(s["boundary_nu"], "'boundary_nu'");
      return [=](Stream& rng, const RunContext& ctx) {
        const auto fld = simulate_field(h, mu, nu, cols, rows, rng, boundary);
        auto r = verify_burke(fld);
        if (boundary) r.info["boundary_nu"] = boundary->name;
        if (!csv.empty()) {
          write_text(output_path(ctx, csv), [&](std::ostream& os) { write_field_csv(os, fld); });
          r.info["csv"] = csv;
        }
        return r;
      };
    }
  });
}

/// Numeric construction against the closed form on a grid, zero covariance of
/// the two linear forms, and uniformity of the Rosenblatt output.
inline VerificationReport skorokhod_gaussian_check(double beta, double sigma, std::size_t grid, std::size_t n,
                                                   Stream& rng) {
  VerificationReport r;
  r.name = "skorokhod_gaussian(beta=" + to_text(beta) + ",sigma=" + to_text(sigma) + ")";
  const auto numeric = build_involution(gaussian_family(beta, sigma));
  const auto closed = catalog::gaussian_rosenblatt(beta, sigma);
  const double sd = sigma / std::sqrt(1.0 - beta * beta);
  double sup_f = 0.0;
  double sup_g = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = sd * normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(grid));
    for (std::size_t j = 0; j < grid; ++j) {
      const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
      sup_f = std::max(sup_f, std::abs(numeric.f(x, u) - closed.f(x, u)));
      sup_g = std::max(sup_g, std::abs(numeric.g(x, u) - closed.g(x, u)));
      pts.emplace_back(x, u);
    }
  }
  r.values["sup_f_deviation"] = sup_f;
  r.values["sup_g_deviation"] = sup_g;
  r.require(std::max(sup_f, sup_g) <= 1e-8, "numeric construction differs from the closed form");
  const auto inv = check_involution<double, double>(numeric, pts, 1e-8);
  r.values["round_trip_deviation"] = inv.values.at("max_deviation");
  r.require(inv.pass, "numeric construction is not an involution on the grid");

  if (n > 0) {
    const Law mu = Law::normal(0.0, sd * sd);
    std::vector<double> a(n);
    std::vector<double> b(n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sample(mu, rng);
      const double u = rng.uniform();
      const double z = normal_quantile(u);
      a[i] = beta * x + sigma * z;
      b[i] = (1.0 - beta * beta) * x / sigma - beta * z;
      v[i] = normal_cdf(b[i]);
    }
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double c = 0.0;
    double c2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (a[i] - ma) * (b[i] - mb);
      c += t;
      c2 += t * t;
    }
    const auto nn = static_cast<double>(n);
    const double cov = c / nn;
    const double se = std::sqrt(std::max(0.0, c2 / nn - cov * cov) / nn);
    r.values["covariance"] = cov;
    r.values["covariance_se"] = se;
    r.require(std::abs(cov) <= 4.0 * se, "covariance of the linear forms is not zero within 4 s.e.");
    r.add_test("v_uniform", gof_law(v, Law::uniform_unit()));
  }
  return r;
}

inline Runner compile_skorokhod(const YAML::Node& s, const std::string& where) {
  check_keys(s, {"kind", "name", "expect", "beta", "sigma", "grid", "n"}, where);
  const auto beta = need<double>(s, "beta", where);
  const auto sigma = need<double>(s, "sigma", where);
  if (!(std::abs(beta) < 1.0)) throw ConfigError("'beta' must satisfy |beta| < 1", s["beta"].Mark());
  if (!(sigma > 0.0)) throw ConfigError("'sigma' must be positive", s["sigma"].Mark());
  const auto grid = static_cast<std::size_t>(positive(s, "grid", 100));
  const auto n = static_cast<std::size_t>(get<std::int64_t>(s, "n", 1000000));
  return [=](Stream& rng, const RunContext&) { return skorokhod_gaussian_check(beta, sigma, grid, n, rng); };
}

inline const std::map<std::string, Runner (*)(const YAML::Node&, const std::string&)>& compilers() {
  static const std::map<std::string, Runner (*)(const YAML::Node&, const std::string&)> table{
      {"involution", compile_involution},
      {"hypotheses", compile_hypotheses},
      {"reversibility", compile_reversibility},
      {"ip", compile_ip},
      {"detailed-balance", compile_detailed_balance},
      {"rrw-characterize", compile_rrw},
      {"kdv-tv", compile_kdv},
      {"burke", compile_burke},
      {"skorokhod-gaussian", compile_skorokhod},
  };
  return table;
}

}  // namespace config_detail

/// Parse and validate a whole configuration. Nothing is computed here.
inline RunConfig parse_config(const std::string& text) {
  using namespace config_detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping", root.Mark());
  check_keys(root, {"seed", "checks"}, "configuration");
  RunConfig cfg;
  if (root["seed"]) {
    const YAML::Node s = root["seed"];
    std::uint64_t v = 0;
    if (!s.IsScalar() || s.Scalar().starts_with("-") || !YAML::convert<std::uint64_t>::decode(s, v)) {
      throw ConfigError("'seed' must be an unsigned 64-bit integer", s.Mark());
    }
    cfg.seed = v;
  }
  const YAML::Node checks = root["checks"];
  if (!checks) return cfg;
  if (!checks.IsSequence()) throw ConfigError("'checks' must be a list", checks.Mark());
  std::size_t index = 0;
  for (const auto& stanza : checks) {
    const std::string where = "check #" + std::to_string(index + 1);
    if (!stanza.IsMap()) throw ConfigError(where + " must be a mapping", stanza.Mark());
    const YAML::Node kind_node = require(stanza, "kind", where);
    const auto kind = scalar<std::string>(kind_node, "'kind'");
    const auto it = compilers().find(kind);
    if (it == compilers().end()) throw ConfigError("unknown check kind '" + kind + "'", kind_node.Mark());
    CompiledCheck c;
    c.kind = kind;
    c.name = get<std::string>(stanza, "name", kind + "#" + std::to_string(index + 1));
    const auto expect = get<std::string>(stanza, "expect", std::string("pass"));
    if (expect != "pass" && expect != "fail") {
      throw ConfigError("'expect' must be \"pass\" or \"fail\"", stanza["expect"].Mark());
    }
    c.expect_pass = expect == "pass";
    c.inputs = to_json(stanza);
    c.run = it->second(stanza, where);
    cfg.checks.push_back(std::move(c));
    ++index;
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

/// Run every check in order; a check that throws is recorded as failed.
inline nlohmann::json run(const RunConfig& cfg, const RunContext& ctx = {}) {
  if (!cfg.seed) throw ConfigError("no seed: set 'seed' in the configuration or pass --seed");
  const Stream root(*cfg.seed);
  nlohmann::json out;
  out["version"] = kVersion;
  out["seed"] = *cfg.seed;
  out["checks"] = nlohmann::json::array();
  bool all = true;
  std::size_t passed = 0;
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
    const auto& c = cfg.checks[i];
    Stream rng = root.split(i);
    nlohmann::json j;
    const auto start = std::chrono::steady_clock::now();
    try {
      const VerificationReport r = c.run(rng, ctx);
      j = r;
      j["outcome"] = r.pass ? "pass" : "fail";
      j["pass"] = r.pass == c.expect_pass;
    } catch (const std::exception& e) {
      j["error"] = e.what();
      j["outcome"] = "error";
      j["pass"] = false;
    }
    if (ctx.timing) {
      j["runtime_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    j["kind"] = c.kind;
    j["label"] = c.name;
    j["expect"] = c.expect_pass ? "pass" : "fail";
    j["inputs"] = c.inputs;
    if (j["pass"].get<bool>()) {
      ++passed;
    } else {
      all = false;
    }
    out["checks"].push_back(std::move(j));
  }
  out["pass"] = all;
  out["summary"] = {{"checks", cfg.checks.size()}, {"passed", passed}};
  return out;
}

}  // namespace revip
