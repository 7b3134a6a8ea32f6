#include "trajmc/problem_config.hpp"

#include <fstream>
#include <sstream>

#include "toml.hpp"

#include "trajmc/errors.hpp"

namespace trajmc {
namespace {

double number(const toml::table& t, const char* key, const std::string& source) {
  const auto v = t[key].value<double>();
  if (!v) throw ConfigError(source + ": missing or non-numeric key '" + key + "'");
  return *v;
}

Vec6 state(const toml::table& t, const char* key, const std::string& source) {
  const auto* arr = t[key].as_array();
  if (arr == nullptr || arr->size() != 6) {
    throw ConfigError(source + ": '" + key + "' must be an array of 6 numbers");
  }
  Vec6 x;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto v = (*arr)[i].value<double>();
    if (!v) throw ConfigError(source + ": '" + key + "' has a non-numeric entry");
    x(static_cast<Eigen::Index>(i)) = *v;
  }
  return x;
}

}  // namespace

ProblemDefinition parse_problem_definition(const std::string& toml_text,
                                           const std::string& source) {
  toml::table t;
  try {
    t = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  ProblemDefinition d;
  d.name = t["name"].value_or(std::string{});
  d.system.mu = number(t, "mu", source);
  d.system.du_km = number(t, "du_km", source);
  d.system.tu_s = number(t, "tu_s", source);
  d.system.mass_unit_kg = number(t, "mass_unit_kg", source);
  d.m0_kg = number(t, "m0_kg", source);
  d.fuel_kg = number(t, "fuel_kg", source);
  d.isp_s = number(t, "isp_s", source);
  d.tmax_n = number(t, "tmax_n", source);
  d.x0 = state(t, "x0", source);
  d.xf = state(t, "xf", source);
  d.period_tf = number(t, "period_tf", source);
  d.tau_s_max = number(t, "tau_s_max", source);
  d.planar = t["planar"].value_or(true);
  d.correct_orbits = t["correct_orbits"].value_or(true);
  d.n_orb = static_cast<int>(t["n_orb"].value_or(std::int64_t{2000}));
  d.system.validate();
  if (!(d.m0_kg > d.fuel_kg && d.fuel_kg > 0.0)) {
    throw ConfigError(source + ": need m0_kg > fuel_kg > 0");
  }
  if (!(d.isp_s > 0.0) || !(d.tmax_n >= 0.0)) {
    throw ConfigError(source + ": isp_s must be positive and tmax_n non-negative");
  }
  if (!(d.tau_s_max > 0.0)) throw ConfigError(source + ": tau_s_max must be positive");
  if (d.n_orb < 1) throw ConfigError(source + ": n_orb must be positive");
  return d;
}

ProblemDefinition load_problem_definition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_definition(ss.str(), path);
}

}  // namespace trajmc
