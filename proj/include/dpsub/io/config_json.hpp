#pragma once

// Scenario configuration as JSON. Every object has a fixed key set and
// unknown keys are rejected. Library and block indices are 0-based, like the
// graph_id column of the trace.
//
// {
//   "name": "demo", "description": "", "seed": 7, "output": "out/demo",
//   "ensemble": {"kind": "lasso", "sigma": 0.1, "q": [[1, 0], [0, 1]],
//                "agents": 0, "dimension": 0, "q_range": [-2, 2],
//                "set": {"kind": "ball", "center": [0, 0], "radius": 1}},
//   "schedule": {"kind": "periodic",
//                "library": ["a1.txt", {"file": "a2.txt"}, {"eta": 0.1, "rows": [[...]]}],
//                "block_length": 0, "blocks": [[0, 1], [1, 0]],
//                "phases": [[0], [1]], "dwell_cap": 1000000},
//   "stepsize": {"kind": "power", "value": 0.6},
//   "initial": {"kind": "uniform", "low": 0, "high": 0.1, "states": []},
//   "horizon": 200000, "stride": 100, "check_fraction": 0.01, "solver_tol": 1e-13,
//   "verdict": {"window": 5000, "tol": 0.01, "osc_threshold": 0.05},
//   "reference": {"weights": "auto", "contrast": "none", "tol": 0.001, "contrast_factor": 10}
// }

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "dpsub/error.hpp"
#include "dpsub/io/matrix_text.hpp"
#include "dpsub/scenario.hpp"

namespace dpsub {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace detail {

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      throw ConfigError("unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) + "'");
  }
}

template <class T>
void read_field(const json& j, const char* key, T& out, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const std::string where = path.empty() ? std::string(key) : path + "." + key;
  if constexpr (std::is_unsigned_v<T>) {
    if (!it->is_number_unsigned()) throw ConfigError(where + ": expected a nonnegative integer");
  }
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <class T>
void read_optional(const json& j, const char* key, std::optional<T>& out, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read_field(j, key, v, path);
  out = v;
}

inline MatrixSpec matrix_from_file(const std::string& file, const std::filesystem::path& base) {
  std::filesystem::path p(file);
  if (p.is_relative()) p = base / p;
  const MatrixFile mf = read_matrix_file(p.string());
  return {file, mf.matrix, mf.eta};
}

inline MatrixSpec read_matrix_entry(const json& j, const std::string& path, const std::filesystem::path& base) {
  if (j.is_string()) return matrix_from_file(j.get<std::string>(), base);
  check_keys(j, path, {"file", "eta", "rows"});
  if (j.contains("file")) {
    if (j.contains("rows")) throw ConfigError(path + ": give either 'file' or 'rows', not both");
    std::string f;
    read_field(j, "file", f, path);
    return matrix_from_file(f, base);
  }
  std::vector<std::vector<double>> rows;
  MatrixSpec m;
  read_field(j, "rows", rows, path);
  read_field(j, "eta", m.eta, path);
  if (rows.empty()) throw ConfigError(path + ": matrix needs 'rows' or 'file'");
  try {
    m.entries = Matrix::from_rows(rows);
  } catch (const DimensionMismatchError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return m;
}

}  // namespace detail

/// Parses a config; relative matrix paths resolve against `base`.
inline ScenarioConfig config_from_json(const json& j, const std::filesystem::path& base = ".") {
  using detail::check_keys;
  using detail::read_field;
  check_keys(j, "", {"name", "description", "seed", "output", "ensemble", "schedule", "stepsize", "initial",
                     "horizon", "stride", "check_fraction", "solver_tol", "verdict", "reference"});
  if (!j.contains("ensemble")) throw ConfigError("missing key 'ensemble'");
  if (!j.contains("schedule")) throw ConfigError("missing key 'schedule'");
  ScenarioConfig c;
  read_field(j, "name", c.name, "");
  read_field(j, "description", c.description, "");
  read_field(j, "seed", c.seed, "");
  read_field(j, "output", c.output, "");
  read_field(j, "horizon", c.horizon, "");
  read_field(j, "stride", c.stride, "");
  read_field(j, "check_fraction", c.check_fraction, "");
  read_field(j, "solver_tol", c.solver_tol, "");

  const json& e = j.at("ensemble");
  check_keys(e, "ensemble", {"kind", "sigma", "q", "agents", "dimension", "q_range", "set"});
  read_field(e, "kind", c.ensemble.kind, "ensemble");
  read_field(e, "sigma", c.ensemble.sigma, "ensemble");
  read_field(e, "q", c.ensemble.q, "ensemble");
  read_field(e, "agents", c.ensemble.agents, "ensemble");
  read_field(e, "dimension", c.ensemble.dimension, "ensemble");
  if (e.contains("q_range")) {
    std::vector<double> r;
    read_field(e, "q_range", r, "ensemble");
    if (r.size() != 2 || !(r[0] <= r[1])) throw ConfigError("ensemble.q_range: expected [low, high]");
    c.ensemble.q_low = r[0];
    c.ensemble.q_high = r[1];
  }
  if (e.contains("set")) {
    const json& s = e.at("set");
    check_keys(s, "ensemble.set", {"kind", "center", "radius", "lower", "upper"});
    read_field(s, "kind", c.ensemble.set.kind, "ensemble.set");
    read_field(s, "center", c.ensemble.set.center, "ensemble.set");
    read_field(s, "radius", c.ensemble.set.radius, "ensemble.set");
    read_field(s, "lower", c.ensemble.set.lower, "ensemble.set");
    read_field(s, "upper", c.ensemble.set.upper, "ensemble.set");
  }

  const json& s = j.at("schedule");
  check_keys(s, "schedule", {"kind", "library", "block_length", "blocks", "phases", "dwell_cap"});
  read_field(s, "kind", c.schedule.kind, "schedule");
  if (!s.contains("library") || !s.at("library").is_array())
    throw ConfigError("schedule.library: expected an array of matrices");
  for (std::size_t i = 0; i < s.at("library").size(); ++i)
    c.schedule.library.push_back(
        detail::read_matrix_entry(s.at("library")[i], "schedule.library[" + std::to_string(i) + "]", base));
  read_field(s, "block_length", c.schedule.block_length, "schedule");
  read_field(s, "blocks", c.schedule.blocks, "schedule");
  if (s.contains("phases")) {
    std::vector<std::vector<std::size_t>> ph;
    read_field(s, "phases", ph, "schedule");
    if (ph.size() != 2) throw ConfigError("schedule.phases: expected two blocks");
    c.schedule.phases = {ph[0], ph[1]};
  }
  read_field(s, "dwell_cap", c.schedule.dwell_cap, "schedule");

  if (j.contains("stepsize")) {
    const json& st = j.at("stepsize");
    check_keys(st, "stepsize", {"kind", "value"});
    read_field(st, "kind", c.stepsize.kind, "stepsize");
    read_field(st, "value", c.stepsize.value, "stepsize");
  }
  if (j.contains("initial")) {
    const json& in = j.at("initial");
    check_keys(in, "initial", {"kind", "low", "high", "states"});
    read_field(in, "kind", c.initial.kind, "initial");
    read_field(in, "low", c.initial.low, "initial");
    read_field(in, "high", c.initial.high, "initial");
    read_field(in, "states", c.initial.states, "initial");
  }
  if (j.contains("verdict")) {
    const json& v = j.at("verdict");
    check_keys(v, "verdict", {"window", "tol", "osc_threshold"});
    detail::read_optional(v, "window", c.verdict.window, "verdict");
    read_field(v, "tol", c.verdict.tol, "verdict");
    detail::read_optional(v, "osc_threshold", c.verdict.osc_threshold, "verdict");
  }
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    check_keys(r, "reference", {"weights", "contrast", "tol", "contrast_factor"});
    read_field(r, "weights", c.reference.weights, "reference");
    read_field(r, "contrast", c.reference.contrast, "reference");
    read_field(r, "tol", c.reference.tol, "reference");
    read_field(r, "contrast_factor", c.reference.contrast_factor, "reference");
  }
  return c;
}

inline ScenarioConfig config_from_string(const std::string& text, const std::filesystem::path& base = ".") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j, base);
}

inline ScenarioConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  return config_from_string(text, std::filesystem::path(path).parent_path());
}

inline ordered_json matrix_to_json(const MatrixSpec& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto r = m.entries.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"eta", m.eta}, {"rows", rows}};
}

/// Full config with matrices inlined; parses back to an equal config.
inline ordered_json config_to_json(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["seed"] = c.seed;
  if (!c.output.empty()) j["output"] = c.output;
  ordered_json set = {{"kind", c.ensemble.set.kind}};
  if (c.ensemble.set.kind == "ball") {
    if (!c.ensemble.set.center.empty()) set["center"] = c.ensemble.set.center;
    set["radius"] = c.ensemble.set.radius;
  } else {
    set["lower"] = c.ensemble.set.lower;
    set["upper"] = c.ensemble.set.upper;
  }
  j["ensemble"] = {{"kind", c.ensemble.kind},
                   {"sigma", c.ensemble.sigma},
                   {"q", c.ensemble.q},
                   {"agents", c.ensemble.agents},
                   {"dimension", c.ensemble.dimension},
                   {"q_range", {c.ensemble.q_low, c.ensemble.q_high}},
                   {"set", set}};
  ordered_json lib = ordered_json::array();
  for (const auto& m : c.schedule.library) lib.push_back(matrix_to_json(m));
  j["schedule"] = {{"kind", c.schedule.kind},
                   {"library", lib},
                   {"block_length", c.schedule.block_length},
                   {"blocks", c.schedule.blocks},
                   {"phases", {c.schedule.phases[0], c.schedule.phases[1]}},
                   {"dwell_cap", c.schedule.dwell_cap}};
  j["stepsize"] = {{"kind", c.stepsize.kind}, {"value", c.stepsize.value}};
  j["initial"] = {{"kind", c.initial.kind},
                  {"low", c.initial.low},
                  {"high", c.initial.high},
                  {"states", c.initial.states}};
  j["horizon"] = c.horizon;
  j["stride"] = c.stride;
  j["check_fraction"] = c.check_fraction;
  j["solver_tol"] = c.solver_tol;
  ordered_json v = {{"window", nullptr}, {"tol", c.verdict.tol}, {"osc_threshold", nullptr}};
  if (c.verdict.window) v["window"] = *c.verdict.window;
  if (c.verdict.osc_threshold) v["osc_threshold"] = *c.verdict.osc_threshold;
  j["verdict"] = v;
  j["reference"] = {{"weights", c.reference.weights},
                    {"contrast", c.reference.contrast},
                    {"tol", c.reference.tol},
                    {"contrast_factor", c.reference.contrast_factor}};
  return j;
}

}  // namespace dpsub
