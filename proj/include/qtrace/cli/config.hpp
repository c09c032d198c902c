// Copyright 2026 The qtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qtrace/ensemble.hpp"
#include "qtrace/gst.hpp"
#include "qtrace/ht.hpp"
#include "qtrace/qcore.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtrace::cli {

/// Schema violation, reported with a JSON-pointer style field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class OutputFormat { kCsv, kJson };

struct ComponentConfig {
  double prob = 0.0;
  std::vector<RotationParams> factors;  ///< one per qubit, radians
};

struct Params {
  std::vector<int> powers{2};
  std::vector<int> g_powers;
  int order = 8;
  std::string estimator = "oracle";   ///< oracle | ht | gst
  std::string strategy = "enumerate"; ///< enumerate | mc
  std::string mode = "exact";         ///< exact | shots | gaussian
  std::uint64_t shots = 1000;
  std::uint64_t trials = 100'000;
  double epsilon_trunc = gst::kDefaultEpsilon;
  double theta_basis = gst::kDefaultTheta;  ///< radians (config gives units of pi)
  std::uint64_t enumeration_cap = ht::kDefaultEnumerationCap;
  double ht_sigma = 0.0;
  double gst_sigma = 1e-4;  ///< used only in gaussian mode
  bool allow_pinv = false;
};

struct SweepConfig {
  std::string parameter = "shots";  ///< shots | epsilon_trunc | ht_sigma | gst_sigma
  std::vector<double> values;
  std::string estimator = "ht";
  int power = 2;
};

struct BoundsConfig {
  int d = 2;
  double eps_tilde = 0.01;
  double delta_tilde = 0.05;
  double eps1 = 1e-4;
  double eps2 = 1e-4;
  double epsilon = 0.1;
  int n_layers = 4;
  double shots = 1e6;
};

struct RunConfig {
  int schema = 1;
  int n_qubits = 1;
  std::vector<ComponentConfig> components;
  std::uint64_t seed = 0;
  int max_qubits = kDefaultMaxQubits;
  OutputFormat format = OutputFormat::kCsv;
  std::string output_path = "-";
  bool record_timing = false;
  Params params;
  SweepConfig sweep;
  BoundsConfig bounds;

  EnsembleSpec ensemble() const {
    std::vector<EnsembleComponent> comps;
    comps.reserve(components.size());
    for (const auto& c : components) comps.push_back({c.prob, ProductGate{c.factors}});
    return EnsembleSpec(n_qubits, std::move(comps), max_qubits);
  }
};

/// Gate parameters of the bundled four-component, three-qubit model.
inline constexpr const char* kReferenceConfig = R"json({
  "schema": 1,
  "n_qubits": 3,
  "components": [
    {"prob": 0.1, "angles": [0.29, 0.07, 0.11]},
    {"prob": 0.2, "angles": [0.46, 0.62, 0.82]},
    {"prob": 0.3, "angles": [0.41, 0.59, 0.53]},
    {"prob": 0.4, "angles": [0.55, 0.31, 0.60]}
  ],
  "seed": 20240601,
  "output": {"format": "csv", "path": "-"},
  "params": {"powers": [2, 3, 4], "order": 8}
})json";

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(path + "/" + it.key(), "unknown field");
  }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(path + "/" + key, "required field missing");
  return obj.at(key);
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

inline std::int64_t as_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e18)
      return static_cast<std::int64_t>(x);
  }
  throw ConfigError(path, "expected an integer");
}

inline std::uint64_t as_count(const json& v, const std::string& path, std::int64_t min = 1) {
  const auto x = as_integer(v, path);
  if (x < min) throw ConfigError(path, "must be >= " + std::to_string(min));
  return static_cast<std::uint64_t>(x);
}

inline std::string as_choice(const json& v, const std::string& path,
                             std::initializer_list<const char*> choices) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  const auto s = v.get<std::string>();
  std::string list;
  for (const char* c : choices) {
    if (s == c) return s;
    list += std::string(list.empty() ? "" : ", ") + c;
  }
  throw ConfigError(path, "must be one of: " + list);
}

inline RotationParams parse_angles(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3)
    throw ConfigError(path, "expected [theta, phi, lambda] in units of pi");
  return RotationParams::in_pi_units(as_number(v[0], path + "/0"), as_number(v[1], path + "/1"),
                                     as_number(v[2], path + "/2"));
}

inline std::vector<int> parse_int_list(const json& v, const std::string& path, int min) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = as_integer(v[i], path + "/" + std::to_string(i));
    if (x < min || x > 1'000'000)
      throw ConfigError(path + "/" + std::to_string(i), "must be >= " + std::to_string(min));
    out.push_back(static_cast<int>(x));
  }
  return out;
}

inline void parse_params(const json& j, Params& p) {
  const std::string path = "/params";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  check_keys(j, path,
             {"powers", "g_powers", "order", "estimator", "strategy", "mode", "shots", "trials",
              "epsilon_trunc", "theta_basis", "enumeration_cap", "ht_sigma", "gst_sigma",
              "allow_pinv"});
  if (j.contains("powers")) p.powers = parse_int_list(j["powers"], path + "/powers", 1);
  if (j.contains("g_powers")) p.g_powers = parse_int_list(j["g_powers"], path + "/g_powers", 0);
  if (j.contains("order")) p.order = static_cast<int>(as_count(j["order"], path + "/order"));
  if (j.contains("estimator"))
    p.estimator = as_choice(j["estimator"], path + "/estimator", {"oracle", "ht", "gst"});
  if (j.contains("strategy"))
    p.strategy = as_choice(j["strategy"], path + "/strategy", {"enumerate", "mc"});
  if (j.contains("mode"))
    p.mode = as_choice(j["mode"], path + "/mode", {"exact", "shots", "gaussian"});
  if (j.contains("shots")) p.shots = as_count(j["shots"], path + "/shots");
  if (j.contains("trials")) p.trials = as_count(j["trials"], path + "/trials");
  if (j.contains("epsilon_trunc")) {
    p.epsilon_trunc = as_number(j["epsilon_trunc"], path + "/epsilon_trunc");
    if (!(p.epsilon_trunc > 0.0 && p.epsilon_trunc < 1.0))
      throw ConfigError(path + "/epsilon_trunc", "must lie in (0, 1)");
  }
  if (j.contains("theta_basis")) {
    p.theta_basis = pi * as_number(j["theta_basis"], path + "/theta_basis");
    if (gst::is_multiple_of_pi(p.theta_basis))
      throw ConfigError(path + "/theta_basis", "must not be an integer (multiple of pi)");
  }
  if (j.contains("enumeration_cap"))
    p.enumeration_cap = as_count(j["enumeration_cap"], path + "/enumeration_cap");
  for (const char* key : {"ht_sigma", "gst_sigma"}) {
    if (!j.contains(key)) continue;
    const double s = as_number(j[key], path + "/" + key);
    if (s < 0.0) throw ConfigError(path + "/" + key, "must be >= 0");
    (std::string(key) == "ht_sigma" ? p.ht_sigma : p.gst_sigma) = s;
  }
  if (j.contains("allow_pinv")) {
    if (!j["allow_pinv"].is_boolean()) throw ConfigError(path + "/allow_pinv", "expected a boolean");
    p.allow_pinv = j["allow_pinv"].get<bool>();
  }
}

inline void parse_sweep(const json& j, SweepConfig& s) {
  const std::string path = "/sweep";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  check_keys(j, path, {"parameter", "values", "estimator", "power"});
  s.parameter = as_choice(require(j, path, "parameter"), path + "/parameter",
                          {"shots", "epsilon_trunc", "ht_sigma", "gst_sigma"});
  const auto& vals = require(j, path, "values");
  if (!vals.is_array() || vals.empty()) throw ConfigError(path + "/values", "expected a non-empty array");
  s.values.clear();
  for (std::size_t i = 0; i < vals.size(); ++i)
    s.values.push_back(as_number(vals[i], path + "/values/" + std::to_string(i)));
  if (j.contains("estimator"))
    s.estimator = as_choice(j["estimator"], path + "/estimator", {"ht", "gst"});
  if (j.contains("power")) s.power = static_cast<int>(as_count(j["power"], path + "/power"));
}

inline void parse_bounds(const json& j, BoundsConfig& b) {
  const std::string path = "/bounds";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  check_keys(j, path,
             {"d", "eps_tilde", "delta_tilde", "eps1", "eps2", "epsilon", "n_layers", "shots"});
  if (j.contains("d")) b.d = static_cast<int>(as_count(j["d"], path + "/d"));
  if (j.contains("eps_tilde")) b.eps_tilde = as_number(j["eps_tilde"], path + "/eps_tilde");
  if (j.contains("delta_tilde")) b.delta_tilde = as_number(j["delta_tilde"], path + "/delta_tilde");
  if (j.contains("eps1")) b.eps1 = as_number(j["eps1"], path + "/eps1");
  if (j.contains("eps2")) b.eps2 = as_number(j["eps2"], path + "/eps2");
  if (j.contains("epsilon")) b.epsilon = as_number(j["epsilon"], path + "/epsilon");
  if (j.contains("n_layers")) b.n_layers = static_cast<int>(as_count(j["n_layers"], path + "/n_layers"));
  if (j.contains("shots")) b.shots = as_number(j["shots"], path + "/shots");
}

}  // namespace detail

/// Parses and validates a config document. Every check runs before any
/// computation; the first violation is reported with its field path.
inline RunConfig parse_config(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  detail::check_keys(j, "",
                     {"schema", "n_qubits", "components", "seed", "max_qubits", "output",
                      "record_timing", "params", "sweep", "bounds"});
  RunConfig c;
  const auto schema = detail::as_integer(detail::require(j, "", "schema"), "/schema");
  if (schema != 1) throw ConfigError("/schema", "unsupported schema version " + std::to_string(schema));
  if (j.contains("max_qubits")) {
    c.max_qubits = static_cast<int>(detail::as_count(j["max_qubits"], "/max_qubits"));
    if (c.max_qubits > 30) throw ConfigError("/max_qubits", "must be <= 30");
  }
  c.n_qubits = static_cast<int>(detail::as_count(detail::require(j, "", "n_qubits"), "/n_qubits"));
  if (c.n_qubits > c.max_qubits)
    throw ConfigError("/n_qubits", "exceeds max_qubits = " + std::to_string(c.max_qubits));

  const auto& comps = detail::require(j, "", "components");
  if (!comps.is_array() || comps.empty())
    throw ConfigError("/components", "expected a non-empty array");
  double total = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string path = "/components/" + std::to_string(i);
    const auto& cj = comps[i];
    if (!cj.is_object()) throw ConfigError(path, "expected an object");
    detail::check_keys(cj, path, {"prob", "angles", "angles_per_qubit"});
    ComponentConfig cc;
    cc.prob = detail::as_number(detail::require(cj, path, "prob"), path + "/prob");
    if (!(cc.prob > 0.0 && cc.prob <= 1.0)) throw ConfigError(path + "/prob", "must lie in (0, 1]");
    total += cc.prob;
    if (cj.contains("angles") == cj.contains("angles_per_qubit"))
      throw ConfigError(path, "exactly one of angles / angles_per_qubit is required");
    if (cj.contains("angles")) {
      cc.factors.assign(static_cast<std::size_t>(c.n_qubits),
                        detail::parse_angles(cj["angles"], path + "/angles"));
    } else {
      const auto& per = cj["angles_per_qubit"];
      if (!per.is_array() || per.size() != static_cast<std::size_t>(c.n_qubits))
        throw ConfigError(path + "/angles_per_qubit", "expected one angle triple per qubit");
      for (std::size_t q = 0; q < per.size(); ++q)
        cc.factors.push_back(
            detail::parse_angles(per[q], path + "/angles_per_qubit/" + std::to_string(q)));
    }
    c.components.push_back(std::move(cc));
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance)
    throw ConfigError("/components", "probabilities sum to " + std::to_string(total) + ", expected 1");

  if (j.contains("seed")) c.seed = detail::as_count(j["seed"], "/seed", 0);
  if (j.contains("record_timing")) {
    if (!j["record_timing"].is_boolean()) throw ConfigError("/record_timing", "expected a boolean");
    c.record_timing = j["record_timing"].get<bool>();
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    if (!o.is_object()) throw ConfigError("/output", "expected an object");
    detail::check_keys(o, "/output", {"format", "path"});
    if (o.contains("format"))
      c.format = detail::as_choice(o["format"], "/output/format", {"csv", "json"}) == "csv"
                     ? OutputFormat::kCsv
                     : OutputFormat::kJson;
    if (o.contains("path")) {
      if (!o["path"].is_string()) throw ConfigError("/output/path", "expected a string");
      c.output_path = o["path"].get<std::string>();
    }
  }
  if (j.contains("params")) detail::parse_params(j["params"], c.params);
  if (j.contains("sweep")) detail::parse_sweep(j["sweep"], c.sweep);
  if (j.contains("bounds")) detail::parse_bounds(j["bounds"], c.bounds);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qtrace::cli
