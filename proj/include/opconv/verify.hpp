#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace opconv {

struct VerifyConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 10000;         // sampled cases per randomized property
  std::size_t positive_runs = 200;    // experiments per strictly convex builtin
  std::optional<std::string> function_spec;  // extra function for the chord and chord-gap suites
  double tol_weak = 1e-6;
  double tol_strong = 1e-3;
  double tol_jensen = 1e-10;
};

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  double worst = 0.0;  // property-specific worst-case statistic
  std::string detail;
};

// Runs every module's invariant suite in a fixed order.
std::vector<PropertyResult> run_verify(const VerifyConfig& config);

nlohmann::json verify_summary(const VerifyConfig& config, const std::vector<PropertyResult>& results);

const char* version_string();

}  // namespace opconv
