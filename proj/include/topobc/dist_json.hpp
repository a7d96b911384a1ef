// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topobc/errors.hpp"
#include "topobc/state_model.hpp"

namespace topobc {

struct ParsedDistribution {
  StateDistribution dist;
  std::vector<std::string> warnings;
};

// Distribution config:
//   {"alpha": "1/2",
//    "states": [{"csit": "PN", "topology": "SW", "fraction": 0.5}, ...]}
// csit letters are P/D/N for (user1, user2); topology letters S/W map
// strong/weak for (link1, link2). alpha accepts "p/q" or a decimal; decimals
// are snapped to a fraction with denominator <= 1000 (warned when inexact).
inline ParsedDistribution parse_distribution_json(const nlohmann::json& j) {
  ParsedDistribution out;
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  if (!j.contains("alpha")) throw ConfigError("alpha", "missing");
  try {
    ParsedRational a;
    if (j["alpha"].is_string())
      a = parse_rational(j["alpha"].get<std::string>());
    else
      a = parse_rational(std::to_string(j["alpha"].get<double>()));
    if (!a.exact)
      out.warnings.push_back("alpha snapped to " + a.value.str() + " (denominator <= 1000)");
    out.dist.alpha = a.value;
  } catch (const std::exception& e) {
    throw ConfigError("alpha", e.what());
  }
  if (out.dist.alpha < Rational(0) || out.dist.alpha > Rational(1))
    throw ConfigError("alpha", "must lie in [0,1], got " + out.dist.alpha.str());

  if (!j.contains("states") || !j["states"].is_array())
    throw ConfigError("states", "missing or not an array");
  int idx = 0;
  for (const auto& s : j["states"]) {
    const std::string where = "states[" + std::to_string(idx++) + "]";
    if (!s.is_object()) throw ConfigError(where, "expected an object");
    const auto need = [&](const char* key) {
      if (!s.contains(key)) throw ConfigError(where + "." + key, "missing");
      return s[key];
    };
    const auto csit_s = need("csit").get<std::string>();
    const auto topo_s = need("topology").get<std::string>();
    if (csit_s.size() != 2) throw ConfigError(where + ".csit", "expected two letters from {P,D,N}");
    if (topo_s.size() != 2) throw ConfigError(where + ".topology", "expected two letters from {S,W}");
    const auto i1 = parse_csit_letter(csit_s[0]);
    const auto i2 = parse_csit_letter(csit_s[1]);
    if (!i1 || !i2) throw ConfigError(where + ".csit", "letters must be P, D or N");
    const auto a1 = parse_link_letter(topo_s[0]);
    const auto a2 = parse_link_letter(topo_s[1]);
    if (!a1 || !a2) throw ConfigError(where + ".topology", "letters must be S or W");
    if (!need("fraction").is_number())
      throw ConfigError(where + ".fraction", "expected a number");
    const double f = s["fraction"].get<double>();
    out.dist.set({*i1, *i2}, {*a1, *a2}, f);
  }
  return out;
}

inline ParsedDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path, std::string("JSON parse failure: ") + e.what());
  }
  return parse_distribution_json(j);
}

inline nlohmann::json distribution_to_json(const StateDistribution& dist) {
  nlohmann::json j;
  j["alpha"] = dist.alpha.str();
  j["states"] = nlohmann::json::array();
  for (int i = 0; i < StateDistribution::kStates; ++i) {
    if (dist.fraction(i) <= 0.0) continue;
    const StateKey k = state_from_index(i);
    j["states"].push_back({{"csit", csit_name(k.csit)},
                           {"topology", topology_name(k.topo)},
                           {"fraction", dist.fraction(i)}});
  }
  return j;
}

}  // namespace topobc
