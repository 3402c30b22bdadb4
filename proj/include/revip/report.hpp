#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace revip {

/// Default significance level for pass/fail decisions.
inline constexpr double kLevel = 0.001;

struct TestResult {
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
  std::vector<std::size_t> n;
  double level = kLevel;
  bool pass = true;
  /// Set when the test was short-circuited (for instance a constant marginal).
  std::string flag;

  void decide() { pass = p_value > level; }
};

/// Structured outcome of one exact or statistical check.
struct VerificationReport {
  std::string name;
  bool pass = true;
  /// Named scalar results: residuals, deviations, TV distances, statistics.
  std::map<std::string, double> values;
  /// Named statistical sub-tests.
  std::map<std::string, TestResult> tests;
  /// Human-readable witnesses for failures or notable cells.
  std::vector<std::string> witnesses;
  std::map<std::string, std::string> info;
  /// Named numeric sequences, such as tabulated laws.
  std::map<std::string, std::vector<double>> series;

  void add_test(const std::string& key, TestResult t) {
    pass = pass && t.pass;
    tests.insert_or_assign(key, std::move(t));
  }
  void require(bool ok, const std::string& witness = {}) {
    if (!ok) {
      pass = false;
      if (!witness.empty()) witnesses.push_back(witness);
    }
  }
};

inline void to_json(nlohmann::json& j, const TestResult& t) {
  j = nlohmann::json{{"method", t.method}, {"statistic", t.statistic}, {"p_value", t.p_value},
                     {"dof", t.dof},       {"n", t.n},                 {"level", t.level},
                     {"pass", t.pass}};
  if (!t.flag.empty()) j["flag"] = t.flag;
}

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = nlohmann::json{{"name", r.name}, {"pass", r.pass}, {"values", r.values}, {"tests", r.tests}};
  if (!r.witnesses.empty()) j["witnesses"] = r.witnesses;
  if (!r.info.empty()) j["info"] = r.info;
  if (!r.series.empty()) j["series"] = r.series;
}

}  // namespace revip
