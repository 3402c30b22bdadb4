// Acceptance suite: one line per criterion, nonzero exit when a criterion fails.
// `--allow-fail K` (repeatable) keeps criterion K from affecting the exit code;
// its line is still printed as FAIL.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "revip/revip.hpp"
#include "revip/runner.hpp"

using namespace revip;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> problems;
  json report;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      problems.push_back(what);
    }
  }
};

json run_text(const std::string& text) { return run(parse_config(text)); }

const json& check(const json& rep, std::size_t i) { return rep["checks"][i]; }

double value(const json& c, const std::string& key) { return c["values"][key].get<double>(); }

std::string law(const std::string& kind, const std::string& params) {
  return "{kind: " + kind + ", params: {" + params + "}}";
}

// Every per-check pass flag must be true.
void expect_all(Outcome& o, const json& rep) {
  for (const auto& c : rep["checks"]) {
    if (!c["pass"].get<bool>()) {
      std::string why = c["label"].get<std::string>() + " outcome " + c["outcome"].get<std::string>();
      if (c.contains("error")) why += " (" + c["error"].get<std::string>() + ")";
      if (c.contains("witnesses") && !c["witnesses"].empty()) why += " [" + c["witnesses"][0].get<std::string>() + "]";
      o.expect(false, why);
    }
  }
}

// 1. Involutions
Outcome involution_suite() {
  Outcome o;
  std::string cfg = "seed: 1\nchecks:\n";
  for (const char* m : {"kdv_g1", "kdv_g2", "reflecting_rw"}) {
    cfg += std::string("  - {kind: involution, map: ") + m + ", box: 20, tolerance: 0}\n";
  }
  for (const char* m : {"matsumoto_yor", "swapped_matsumoto_yor", "beta_map", "beta_walk"}) {
    cfg += std::string("  - {kind: involution, map: ") + m + ", n: 100000, tolerance: 1.0e-9}\n";
  }
  cfg += "  - {kind: involution, map: gaussian_rosenblatt, params: {beta: 0.5, sigma: 1}, n: 100000, tolerance: 1.0e-8}\n";
  for (const char* d : {"2", "3"}) {
    cfg += std::string("  - {kind: involution, map: spd_matsumoto_yor, params: {d: ") + d +
           "}, n: 100000, tolerance: 1.0e-7}\n";
  }
  o.report = run_text(cfg);
  expect_all(o, o.report);
  for (std::size_t i = 0; i < 3; ++i) {
    o.expect(value(check(o.report, i), "max_deviation") == 0.0, "integer map not exact");
    o.expect(value(check(o.report, i), "points") > 0.0, "empty integer box");
  }
  return o;
}

// 2. Augmentation reproduces the catalog; KdV violates the hypotheses
Outcome augmentation_suite() {
  Outcome o;
  std::string cfg = "seed: 1\nchecks:\n";
  for (const char* m : {"matsumoto_yor", "swapped_matsumoto_yor", "beta_map", "beta_walk", "reflecting_rw"}) {
    cfg += std::string("  - {kind: hypotheses, map: ") + m + ", n: 10000}\n";
  }
  cfg += "  - {kind: hypotheses, map: kdv, expect: fail}\n";
  o.report = run_text(cfg);
  expect_all(o, o.report);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& c = check(o.report, i);
    const double tol = i == 4 ? 0.0 : 1e-9;
    o.expect(c["values"].contains("max_g_deviation_vs_catalog") && value(c, "max_g_deviation_vs_catalog") <= tol,
             c["label"].get<std::string>() + " differs from catalog g");
  }
  const auto& kdv = check(o.report, 5);
  o.expect(kdv["outcome"] == "fail", "KdV f accepted");
  o.expect(value(kdv, "off_diagonal_nonunique") > 0.0, "no off-diagonal non-uniqueness for KdV");
  bool witness = false;
  for (const auto& w : kdv["witnesses"]) witness |= w.get<std::string>().find("off the diagonal") != std::string::npos;
  o.expect(witness, "no concrete KdV witness");
  return o;
}

// 3. Reflecting random walk, exact
Outcome rrw_exact_suite() {
  Outcome o;
  std::string cfg = "seed: 1\nchecks:\n";
  cfg += "  - kind: detailed-balance\n    map: reflecting_rw\n    lo: 0\n    hi: 200\n    tolerance: 1.0e-15\n";
  cfg += "    mu: " + law("Geometric", "theta: 0.4") + "\n";
  cfg += "    noise: " + law("ThreePoint", "p: 0.2, q: 0.5, r: 0.3") + "\n";
  std::vector<std::string> grid;
  for (const int p : {1, 2, 3}) {
    for (const int q : {5, 6, 7}) {
      const int r = 10 - p - q;
      std::ostringstream s;
      s << "p: 0." << p << ", q: 0." << q << ", r: " << (r == 0 ? "0" : "0." + std::to_string(r));
      if (r == 0) {
        for (const char* pp : {"0.3", "0.2", "0.5"}) grid.push_back(s.str() + ", pprime: " + pp);
      } else {
        grid.push_back(s.str());
      }
    }
  }
  for (const auto& g : grid) cfg += "  - {kind: rrw-characterize, " + g + ", box: 200, perturbations: true}\n";
  o.report = run_text(cfg);
  expect_all(o, o.report);
  o.expect(value(check(o.report, 0), "max_residual") <= 1e-15, "detailed-balance residual above 1e-15");
  for (std::size_t i = 1; i < o.report["checks"].size(); ++i) {
    const auto& c = check(o.report, i);
    o.expect(value(c, "product_defect_tv") <= 1e-12, c["label"].get<std::string>() + " defect above 1e-12");
    o.expect(value(c, "smallest_perturbed_defect") > 1e-6, c["label"].get<std::string>() + " perturbation missed");
    for (const auto& [k, v] : c["values"].items()) {
      const bool identity = k == "zero_state" || k == "stay" || k == "down" || k == "up" || k == "v_up_mass" ||
                            k == "noise_sums" || k == "x_odd_y_even" || k == "x_even_y_odd" ||
                            k == "parity_balance" || k == "y_even_is_q" || k == "x_odd_is_p_prime";
      if (identity) o.expect(v.get<double>() <= 1e-12, c["label"].get<std::string>() + " identity " + k);
    }
  }
  return o;
}

// 4. KdV dichotomy
Outcome kdv_suite() {
  Outcome o;
  std::string cfg = "seed: 1\nchecks:\n";
  for (const char* theta : {"0.3", "0.5", "0.7"}) {
    for (const char* ell : {"2", "4"}) {
      cfg += std::string("  - {kind: kdv-tv, theta: ") + theta + ", ell: " + ell + ", M: 60, max_tail: 1.0e-9}\n";
    }
  }
  o.report = run_text(cfg);
  expect_all(o, o.report);
  for (const auto& c : o.report["checks"]) {
    o.expect(value(c, "tv_g1") <= 10 * value(c, "tail_bound"), "g1 TV above 10 tail bounds");
    o.expect(value(c, "tv_g2") > 10 * value(c, "tail_bound"), "g2 TV within 10 tail bounds");
  }
  return o;
}

// 5. Independence preservation, statistical
Outcome ip_suite() {
  Outcome o;
  auto ip = [](const std::string& map, const std::string& mu, const std::string& nu, const char* expect) {
    return "  - kind: ip\n    map: " + map + "\n    n: 200000\n    expect: " + expect + "\n    mu: " + mu +
           "\n    nu: " + nu + "\n";
  };
  std::string cfg = "seed: 1\nchecks:\n";
  cfg += ip("matsumoto_yor", law("GIG", "alpha: 2, lambda: 1"), law("Gamma", "shape: 2, rate: 1"), "pass");
  cfg += ip("beta_map", law("BetaI", "a: 2, b: 1"), law("BetaI", "a: 3, b: 2"), "pass");
  cfg += ip("gaussian_rosenblatt\n    params: {beta: 0.5, sigma: 1}", law("Normal", "mean: 0, variance: 1.3333333333333333"),
            "{kind: UniformUnit}", "pass");
  cfg += ip("reflecting_rw", law("Geometric", "theta: 0.4"), law("ThreePoint", "p: 0.2, q: 0.5, r: 0.3"), "pass");
  cfg += ip("matsumoto_yor", law("GIG", "alpha: 2, lambda: 1"), "{kind: UniformUnit}", "fail");
  cfg += ip("kdv_g2", law("TruncGeom", "theta: 0.5, ell: 2"), law("ShiftGeom", "theta: 0.5, ell: 2"), "fail");
  // Sethuraman: X ~ Beta(a0, a1), U = (U0, U1) with U0 ~ Bernoulli(a0/(a0+a1)), U1 ~ Beta(1, a0+a1)
  cfg += ip("beta_walk", law("BetaI", "a: 2, b: 3"), law("BernoulliUnit", "p: 0.4, a: 1, b: 5"), "fail");
  o.report = run_text(cfg);
  expect_all(o, o.report);
  const auto& seth = check(o.report, 6);
  o.expect(seth["tests"]["y_marginal"]["pass"].get<bool>(), "Sethuraman Y-marginal rejected");
  return o;
}

// 6. Burke property
Outcome burke_suite() {
  Outcome o;
  auto field = [](const std::string& map, const std::string& mu, const std::string& nu, const std::string& extra) {
    return "  - kind: burke\n    map: " + map + "\n    N: 50\n    T: 50\n    mu: " + mu + "\n    nu: " + nu + "\n" + extra;
  };
  std::string cfg = "seed: 1\nchecks:\n";
  cfg += field("reflecting_rw", law("Geometric", "theta: 0.4"), law("ThreePoint", "p: 0.2, q: 0.5, r: 0.3"), "");
  cfg += field("matsumoto_yor", law("GIG", "alpha: 2, lambda: 1"), law("Gamma", "shape: 2, rate: 1"), "");
  cfg += field("reflecting_rw", law("Geometric", "theta: 0.4"), law("ThreePoint", "p: 0.2, q: 0.5, r: 0.3"),
               "    expect: fail\n    boundary_nu: " + law("ThreePoint", "p: 0.5, q: 0.2, r: 0.3") + "\n");
  o.report = run_text(cfg);
  expect_all(o, o.report);
  for (std::size_t i = 0; i < 2; ++i) {
    for (const auto& [k, t] : check(o.report, i)["tests"].items()) {
      o.expect(t["pass"].get<bool>(), check(o.report, i)["label"].get<std::string>() + " " + k);
    }
  }
  return o;
}

// 7. Skorokhod / Rosenblatt construction
Outcome skorokhod_suite() {
  Outcome o;
  std::string cfg = "seed: 1\nchecks:\n";
  for (const char* bs : {"beta: 0.5, sigma: 1", "beta: -0.5, sigma: 1", "beta: 0.9, sigma: 2"}) {
    cfg += std::string("  - {kind: skorokhod-gaussian, ") + bs + ", grid: 100, n: 1000000}\n";
  }
  o.report = run_text(cfg);
  for (const auto& c : o.report["checks"]) {
    o.expect(c["outcome"] != "error", "error in " + c["label"].get<std::string>());
    if (c["outcome"] == "error") continue;
    o.expect(std::max(value(c, "sup_f_deviation"), value(c, "sup_g_deviation")) <= 1e-8,
             c["label"].get<std::string>() + " differs from the closed form");
    o.expect(std::abs(value(c, "covariance")) <= 4 * value(c, "covariance_se"),
             c["label"].get<std::string>() + " covariance outside 4 s.e.");
  }
  return o;
}

// 8. Null calibration of every test at level 0.01
Outcome calibration_suite() {
  Outcome o;
  const double level = 0.01;
  const int reps = 100;
  const Stream root(1);
  using Method = std::function<TestResult(Stream&)>;
  auto normals = [](Stream& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  const std::vector<std::pair<std::string, Method>> methods{
      {"ks_one_sample",
       [&](Stream& rng) {
         std::vector<double> v(1000);
         for (auto& x : v) x = rng.uniform();
         return ks_one_sample(v, [](double x) { return x; }, level);
       }},
      {"ks_two_sample", [&](Stream& rng) { return ks_two_sample(normals(rng, 1000), normals(rng, 1000), level); }},
      {"chi2_gof",
       [&](Stream& rng) {
         const std::vector<double> probs{0.1, 0.2, 0.3, 0.25, 0.15};
         std::vector<double> counts(probs.size(), 0.0);
         for (int i = 0; i < 1000; ++i) {
           double u = rng.uniform();
           std::size_t k = 0;
           while (k + 1 < probs.size() && u >= probs[k]) u -= probs[k++];
           counts[k] += 1.0;
         }
         return chi2_gof(counts, probs, level);
       }},
      {"gof_law_continuous",
       [&](Stream& rng) {
         const Law g = Law::gamma(2.0, 1.0);
         std::vector<double> v(1000);
         for (auto& x : v) x = sample(g, rng);
         return gof_law(v, g, level);
       }},
      {"gof_law_discrete",
       [&](Stream& rng) {
         const Law g = Law::geometric(0.4);
         std::vector<double> v(1000);
         for (auto& x : v) x = sample(g, rng);
         return gof_law(v, g, level);
       }},
      {"independence_test",
       [&](Stream& rng) { return independence_test(normals(rng, 10000), normals(rng, 10000), {}, level); }},
      {"exchangeability_test",
       [&](Stream& rng) {
         return exchangeability_test(normals(rng, 20000), normals(rng, 20000), 10, 20000, level);
       }},
      {"sign_exchangeability_test",
       [&](Stream& rng) { return sign_exchangeability_test(normals(rng, 1000), normals(rng, 1000), level); }},
      {"bonferroni",
       [&](Stream& rng) {
         std::vector<TestResult> fam;
         for (int k = 0; k < 3; ++k) fam.push_back(ks_two_sample(normals(rng, 500), normals(rng, 500), level));
         return bonferroni(fam, "bonferroni(3 ks)", level);
       }},
  };
  for (std::size_t m = 0; m < methods.size(); ++m) {
    int rejected = 0;
    Stream family = root.split(m);
    for (int r = 0; r < reps; ++r) {
      Stream rng = family.split(static_cast<std::uint64_t>(r));
      if (!methods[m].second(rng).pass) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / reps;
    o.report[methods[m].first] = {{"rejections", rejected}, {"replicates", reps}, {"rate", rate}};
    o.expect(rate >= 0.002 && rate <= 0.03, methods[m].first + " rejection rate " + std::to_string(rate));
  }
  return o;
}

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> allowed;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--allow-fail" && i + 1 < argc) {
      allowed.insert(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--allow-fail K]...\n";
      return 2;
    }
  }
  const std::vector<Criterion> criteria{
      {1, "involution suite", 10, involution_suite},
      {2, "augmentation reproduces catalog, KdV witness", 5, augmentation_suite},
      {3, "reflecting random walk exact", 10, rrw_exact_suite},
      {4, "KdV dichotomy", 10, kdv_suite},
      {5, "independence preservation suite", 60, ip_suite},
      {6, "Burke suite", 30, burke_suite},
      {7, "Skorokhod/Rosenblatt construction", 20, skorokhod_suite},
      {8, "null calibration at level 0.01", 60, calibration_suite},
  };
  bool ok = true;
  std::vector<std::string> first_reports;
  auto line = [&](int id, const std::string& title, bool pass, double secs, const std::string& note) {
    std::printf("criterion %d [%s] %s (%.2f s)%s\n", id, pass ? "PASS" : "FAIL", title.c_str(), secs,
                note.empty() ? "" : ("  " + note).c_str());
    std::fflush(stdout);
    if (!pass && !allowed.contains(id)) ok = false;
  };
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.expect(secs < c.limit_seconds, "runtime above " + std::to_string(static_cast<int>(c.limit_seconds)) + " s");
    std::string note;
    for (std::size_t i = 0; i < out.problems.size() && i < 3; ++i) note += (i ? "; " : "") + out.problems[i];
    if (c.id == 8) note += (note.empty() ? "" : "; ") + out.report.dump();
    first_reports.push_back(out.report.dump(2));
    line(c.id, c.title, out.pass, secs, note);
  }
  // 9. same seeds, same bytes
  {
    const auto start = std::chrono::steady_clock::now();
    bool same = true;
    std::string differing;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      std::string again;
      try {
        again = criteria[i].run().report.dump(2);
      } catch (const std::exception& e) {
        again = e.what();
      }
      if (again != first_reports[i]) {
        same = false;
        differing += (differing.empty() ? "" : ",") + std::to_string(criteria[i].id);
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    line(9, "byte-identical JSON on repeat", same, secs, same ? "" : "differs for criteria " + differing);
  }
  return ok ? 0 : 1;
}
