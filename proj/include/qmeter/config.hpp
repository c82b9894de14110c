#pragma once

// Strict JSON run configuration: exactly the documented keys, no extras,
// no silent type coercion.  Errors name the offending field so callers can
// map them to usage messages.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmeter/model.hpp"

namespace qmeter {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  ModelParams params;
  TimeGrid grid;
  std::uint64_t seed = 1;
  std::size_t n_paths = 10000;
};

namespace detail {

inline double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw ConfigError(std::string(key) + ": missing required key");
  const auto& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(std::string(key) + ": must be a number");
  return v.get<double>();
}

inline std::uint64_t require_uint(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw ConfigError(std::string(key) + ": missing required key");
  const auto& v = j.at(key);
  if (!v.is_number_unsigned())
    throw ConfigError(std::string(key) + ": must be a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: root must be an object");
  static const char* const kKeys[] = {"omega",   "gamma", "alpha", "t_end",
                                      "n_steps", "seed",  "n_paths"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known |= item.key() == k;
    if (!known) throw ConfigError(item.key() + ": unknown key");
  }

  RunConfig cfg;
  cfg.params.omega = detail::require_number(j, "omega");
  cfg.params.gamma = detail::require_number(j, "gamma");
  if (!j.contains("alpha"))
    throw ConfigError("alpha: missing required key");
  const auto& a = j.at("alpha");
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw ConfigError("alpha: must be an array [re, im]");
  cfg.params.alpha = {a[0].get<double>(), a[1].get<double>()};
  cfg.grid.t_end = detail::require_number(j, "t_end");
  cfg.grid.n_steps = detail::require_uint(j, "n_steps");
  cfg.seed = detail::require_uint(j, "seed");
  cfg.n_paths = detail::require_uint(j, "n_paths");
  if (cfg.n_paths == 0) throw ConfigError("n_paths: must be positive");

  try {
    cfg.params.validate();
    cfg.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace qmeter
