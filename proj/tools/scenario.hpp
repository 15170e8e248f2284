#pragma once

// Scenario configuration: strict JSON, flag overrides, validation, hashing.
//
// Schema (every key optional unless marked):
//   model        { mu }
//   initial      REQUIRED { epoch, elements { sma ecc inc raan argp m0 } | state { q[3] p[3] } }
//   perturbation { kind: none|inverse_square|rotating_dipole|third_body,
//                  epsilon, omega, radius, rate, phase }
//   time         { t0, t1 (REQUIRED), samples }
//   integrator   { rel_tol, abs_tol, max_steps, method: dormand_prince|rk4_fixed, initial_step }
//   fd           { chart_step }
//   output       { path }

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vcm/varconst.hpp"

namespace vcm::cli {

using nlohmann::json;

/// Bad usage or configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  KeplerModel model{};
  double epoch = 0.0;
  std::optional<OrbitalElements> elements;
  std::optional<PhaseState> state;
  std::string perturbation = "none";
  double epsilon = 0.0, omega = 0.0, radius = 5.0, rate = 0.0, phase = 0.0;
  double t0 = 0.0, t1 = 0.0;
  std::size_t samples = 100;
  IntegratorConfig integrator{};
  double chart_step = 1e-7;
  std::string output_path;
  std::string hash;

  DisturbingFunction disturbing() const {
    if (perturbation == "inverse_square") return inverse_square(epsilon);
    if (perturbation == "rotating_dipole") return rotating_dipole(epsilon, omega);
    if (perturbation == "third_body") return third_body(epsilon, radius, rate, phase);
    return zero_disturbance();
  }

  /// Initial phase state at t0.
  PhaseState initial_state() const {
    if (state) return *state;
    return state_from_elements(*elements, model, t0);
  }
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"model", "initial", "perturbation", "time", "integrator", "fd", "output"}},
      {"model", {"mu"}},
      {"initial", {"epoch", "elements", "state"}},
      {"initial.elements", {"sma", "ecc", "inc", "raan", "argp", "m0"}},
      {"initial.state", {"q", "p"}},
      {"perturbation", {"kind", "epsilon", "omega", "radius", "rate", "phase"}},
      {"time", {"t0", "t1", "samples"}},
      {"integrator", {"rel_tol", "abs_tol", "max_steps", "method", "initial_step"}},
      {"fd", {"chart_step"}},
      {"output", {"path"}},
  };
  return s;
}

inline void check_keys(const json& j, const std::string& path) {
  const auto it = schema().find(path);
  if (it == schema().end()) return;
  if (!j.is_object()) throw ConfigError("config: '" + path + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string child = path.empty() ? key : path + "." + key;
    if (!it->second.count(key)) throw ConfigError("config: unknown key '" + child + "'");
    check_keys(value, child);
  }
}

inline std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("config: malformed key path '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("config: empty key path");
  return parts;
}

inline double number(const json& root, const std::string& path, double fallback) {
  const json* node = &root;
  for (const std::string& part : split_path(path)) {
    if (!node->is_object() || !node->contains(part)) return fallback;
    node = &(*node)[part];
  }
  if (!node->is_number()) throw ConfigError("config: '" + path + "' must be a number");
  return node->get<double>();
}

inline double required_number(const json& root, const std::string& path) {
  const json* node = &root;
  for (const std::string& part : split_path(path)) {
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("config: missing required key '" + path + "'");
    node = &(*node)[part];
  }
  if (!node->is_number()) throw ConfigError("config: '" + path + "' must be a number");
  return node->get<double>();
}

inline std::string text(const json& root, const std::string& path, const std::string& fallback) {
  const json* node = &root;
  for (const std::string& part : split_path(path)) {
    if (!node->is_object() || !node->contains(part)) return fallback;
    node = &(*node)[part];
  }
  if (!node->is_string()) throw ConfigError("config: '" + path + "' must be a string");
  return node->get<std::string>();
}

inline Vec3 triple(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError("config: '" + path + "' must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number())
      throw ConfigError("config: '" + path + "' must be an array of 3 numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

}  // namespace detail

/// 64-bit FNV-1a of `text`, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

/// Sets `path` (dotted) to `value`, creating objects on the way. A value that
/// parses as JSON is stored as such, anything else as a string.
inline void apply_override(json& root, const std::string& path, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &root;
  const auto parts = detail::split_path(path);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("config: '" + parts[i] + "' is not an object");
    node = &next;
  }
  (*node)[parts.back()] = std::move(parsed);
}

/// "key.path=value" -> (key.path, value).
inline std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key.path=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

/// Validates the merged document and fills defaults. `need_span` demands time.t1.
inline Scenario resolve(const json& root, bool need_span = true) {
  detail::check_keys(root, "");
  using detail::number;
  Scenario sc;
  try {
    sc.model = KeplerModel(number(root, "model.mu", 1.0));

    if (!root.contains("initial")) throw ConfigError("config: missing required key 'initial'");
    const json& init = root["initial"];
    const bool has_el = init.contains("elements"), has_state = init.contains("state");
    if (has_el == has_state)
      throw ConfigError("config: 'initial' needs exactly one of 'elements' or 'state'");
    sc.t0 = number(root, "time.t0", 0.0);
    sc.epoch = number(root, "initial.epoch", sc.t0);
    if (has_el) {
      const std::string p = "initial.elements.";
      sc.elements = OrbitalElements(
          detail::required_number(root, p + "sma"), detail::required_number(root, p + "ecc"),
          detail::required_number(root, p + "inc"), number(root, p + "raan", 0.0),
          number(root, p + "argp", 0.0), number(root, p + "m0", 0.0), sc.epoch);
    } else {
      const json& st = init["state"];
      if (!st.contains("q")) throw ConfigError("config: missing required key 'initial.state.q'");
      if (!st.contains("p")) throw ConfigError("config: missing required key 'initial.state.p'");
      sc.state = PhaseState{sc.t0, detail::triple(st["q"], "initial.state.q"),
                            detail::triple(st["p"], "initial.state.p")};
    }

    sc.perturbation = detail::text(root, "perturbation.kind", "none");
    static const std::set<std::string> kinds = {"none", "inverse_square", "rotating_dipole",
                                                "third_body"};
    if (!kinds.count(sc.perturbation))
      throw ConfigError("config: unknown perturbation.kind '" + sc.perturbation + "'");
    sc.epsilon = number(root, "perturbation.epsilon", 0.0);
    sc.omega = number(root, "perturbation.omega", 0.0);
    sc.radius = number(root, "perturbation.radius", 5.0);
    sc.rate = number(root, "perturbation.rate", 0.0);
    sc.phase = number(root, "perturbation.phase", 0.0);
    if (!(sc.radius > 0.0)) throw ConfigError("config: perturbation.radius must be positive");

    sc.t1 = need_span ? detail::required_number(root, "time.t1") : number(root, "time.t1", sc.t0);
    const double samples = number(root, "time.samples", 100.0);
    if (!(samples >= 2.0) || samples != std::floor(samples) || samples > 1e7)
      throw ConfigError("config: time.samples must be an integer >= 2");
    sc.samples = static_cast<std::size_t>(samples);
    if (need_span && sc.t1 == sc.t0) throw ConfigError("config: time.t1 must differ from time.t0");

    sc.integrator.rel_tol = number(root, "integrator.rel_tol", sc.integrator.rel_tol);
    sc.integrator.abs_tol = number(root, "integrator.abs_tol", sc.integrator.abs_tol);
    const double max_steps = number(root, "integrator.max_steps", 1e6);
    if (!(max_steps >= 1.0) || max_steps != std::floor(max_steps) || max_steps > 1e12)
      throw ConfigError("config: integrator.max_steps must be a positive integer");
    sc.integrator.max_steps = static_cast<long>(max_steps);
    const std::string method = detail::text(root, "integrator.method", "dormand_prince");
    if (method == "dormand_prince") sc.integrator.method = Method::dormand_prince;
    else if (method == "rk4_fixed") sc.integrator.method = Method::rk4_fixed;
    else throw ConfigError("config: unknown integrator.method '" + method + "'");
    if (root.contains("integrator") && root["integrator"].contains("initial_step"))
      sc.integrator.initial_step = detail::required_number(root, "integrator.initial_step");
    sc.integrator.validate();

    sc.chart_step = number(root, "fd.chart_step", 1e-7);
    if (!(sc.chart_step > 0.0)) throw ConfigError("config: fd.chart_step must be positive");
    sc.output_path = detail::text(root, "output.path", "");
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  json hashed = root;
  hashed.erase("output");  // where the table goes is not part of the scenario
  sc.hash = fnv1a_hex(hashed.dump());
  return sc;
}

}  // namespace vcm::cli
