#pragma once

// Typed run parameters and their JSON form. A config is an overlay on the
// experiment's defaults; any key absent from the defaults is rejected.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "varlab/averages.hpp"
#include "varlab/error.hpp"
#include "varlab/harness/ensemble.hpp"
#include "varlab/lattice.hpp"
#include "varlab/weights.hpp"

namespace varlab::harness {

using json = nlohmann::json;

/// Raised for malformed configs and violated experiment preconditions.
struct config_error : precondition_error {
  using precondition_error::precondition_error;
};

inline void config_require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

struct WeightSpec {
  /// sweep | flat | power | two-value | random-ap
  std::string family = "sweep";
  double alpha = 0.2;
  std::uint64_t seed = 7;
};

struct RunParams {
  std::string experiment;
  std::uint64_t seed = 1;
  GridSpec grid{1, 10};
  ScaleSet scales{0, 6, 8, Kernel::ball};
  double p = 2, q = 2, r = 2.5, alpha = 0.75;
  WeightSpec weight;
  std::string generator = "gaussian-field";
  std::size_t count = 16;
  std::size_t family_size = 1;
  json params = json::object();
  std::string output_dir = "out";

  Ensemble ensemble() const { return {seed, count, generator, grid, family_size}; }

  double num(const std::string& key) const {
    config_require(params.contains(key) && params[key].is_number(), "missing numeric param '" + key + "'");
    return params[key].get<double>();
  }
  int integer(const std::string& key) const {
    config_require(params.contains(key) && params[key].is_number_integer(), "missing integer param '" + key + "'");
    return params[key].get<int>();
  }
  std::vector<double> list(const std::string& key) const {
    config_require(params.contains(key) && params[key].is_array(), "missing list param '" + key + "'");
    std::vector<double> out;
    for (const auto& v : params[key]) {
      config_require(v.is_number(), "param '" + key + "' must be a list of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
};

inline std::string kernel_name(Kernel k) { return k == Kernel::ball ? "ball" : "cube"; }

inline json to_json(const RunParams& c) {
  return {{"experiment", c.experiment},
          {"seed", c.seed},
          {"grid", {{"d", c.grid.d()}, {"K", c.grid.K()}}},
          {"scales", {{"k_min", c.scales.k_min}, {"k_max", c.scales.k_max}, {"M", c.scales.M}, {"kernel", kernel_name(c.scales.kernel)}}},
          {"exponents", {{"p", c.p}, {"q", c.q}, {"r", c.r}, {"alpha", c.alpha}}},
          {"weight", {{"family", c.weight.family}, {"alpha", c.weight.alpha}, {"seed", c.weight.seed}}},
          {"ensemble", {{"generator", c.generator}, {"count", c.count}, {"family_size", c.family_size}}},
          {"params", c.params},
          {"output", {{"dir", c.output_dir}}}};
}

namespace detail {

/// Overlays `over` onto `base` in place. Objects merge recursively; every
/// key of `over` must exist in `base`. Arrays and scalars replace.
inline void strict_overlay(json& base, const json& over, const std::string& path) {
  config_require(over.is_object(), "config section '" + path + "' must be an object");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string where = path.empty() ? it.key() : path + "." + it.key();
    config_require(base.contains(it.key()), "unknown config key '" + where + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) strict_overlay(slot, it.value(), where);
    else slot = it.value();
  }
}

template <typename T>
T get_as(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("config key '") + section + "." + key + "' has the wrong type");
  }
}

}  // namespace detail

inline RunParams from_json(const json& j) {
  RunParams c;
  try {
    c.experiment = j.at("experiment").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw config_error("config keys 'experiment' and 'seed' must be a string and an unsigned integer");
  }
  const int d = detail::get_as<int>(j, "grid", "d");
  const int K = detail::get_as<int>(j, "grid", "K");
  try {
    c.grid = GridSpec(d, K);
  } catch (const precondition_error& e) {
    throw config_error(std::string("grid: ") + e.what());
  }
  c.scales.k_min = detail::get_as<int>(j, "scales", "k_min");
  c.scales.k_max = detail::get_as<int>(j, "scales", "k_max");
  c.scales.M = detail::get_as<int>(j, "scales", "M");
  const auto kernel = detail::get_as<std::string>(j, "scales", "kernel");
  config_require(kernel == "ball" || kernel == "cube", "scales.kernel must be 'ball' or 'cube'");
  c.scales.kernel = kernel == "ball" ? Kernel::ball : Kernel::cube;
  c.p = detail::get_as<double>(j, "exponents", "p");
  c.q = detail::get_as<double>(j, "exponents", "q");
  c.r = detail::get_as<double>(j, "exponents", "r");
  c.alpha = detail::get_as<double>(j, "exponents", "alpha");
  c.weight.family = detail::get_as<std::string>(j, "weight", "family");
  c.weight.alpha = detail::get_as<double>(j, "weight", "alpha");
  c.weight.seed = detail::get_as<std::uint64_t>(j, "weight", "seed");
  c.generator = detail::get_as<std::string>(j, "ensemble", "generator");
  c.count = detail::get_as<std::size_t>(j, "ensemble", "count");
  c.family_size = detail::get_as<std::size_t>(j, "ensemble", "family_size");
  c.params = j.at("params");
  c.output_dir = detail::get_as<std::string>(j, "output", "dir");
  try {
    c.ensemble().validate();
  } catch (const precondition_error& e) {
    throw config_error(std::string("ensemble: ") + e.what());
  }
  return c;
}

/// Defaults overlaid with a user config, keys checked.
inline RunParams resolve(const json& defaults, const json& user) {
  json eff = defaults;
  detail::strict_overlay(eff, user, "");
  config_require(eff.at("experiment") == defaults.at("experiment"), "config names a different experiment");
  return from_json(eff);
}

// ---------------------------------------------------------------------------
// Weight sweep

inline std::vector<Weight> build_weights(const WeightSpec& spec, const GridSpec& g, double p) {
  const std::string& f = spec.family;
  if (f == "sweep") {
    const double steep = 0.45 * g.d() * std::max(p - 1.0, 0.0);
    return {flat_weight(g), power_weight(g, 0.2), power_weight(g, steep), two_value_weight(g),
            random_ap_weight(g, spec.seed)};
  }
  if (f == "flat") return {flat_weight(g)};
  if (f == "power") return {power_weight(g, spec.alpha)};
  if (f == "two-value") return {two_value_weight(g)};
  if (f == "random-ap") return {random_ap_weight(g, spec.seed)};
  throw config_error("unknown weight family '" + f + "' (sweep, flat, power, two-value, random-ap)");
}

inline void require_finite_constant(double c, const std::string& what, const Weight& w) {
  config_require(std::isfinite(c), what + " of weight " + w.family + " is not finite");
}

}  // namespace varlab::harness
