#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace condense {

/// One verified statement: what was checked, which invariant it instantiates,
/// and the values involved.
struct Check {
  std::string name;
  std::string invariant;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

inline bool all_pass(const std::vector<Check>& checks) {
  for (auto& c : checks)
    if (!c.pass) return false;
  return true;
}

inline nlohmann::json to_json(const Check& c) {
  nlohmann::json j = {{"name", c.name}, {"invariant", c.invariant}, {"pass", c.pass}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

inline nlohmann::json to_json(const std::vector<Check>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& c : checks) arr.push_back(to_json(c));
  return arr;
}

/// Relative slack for comparing an integer count against a real threshold
/// computed with pow(); keeps T^(1/3) = 3.9999999999999996 from failing 4 >= 4.
inline bool at_least(double value, double threshold) { return value >= threshold * (1 - 1e-12) - 1e-12; }

}  // namespace condense
