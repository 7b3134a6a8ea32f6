#pragma once

#include <string>

#include "trajmc/problem.hpp"

namespace trajmc {

/// Parses a problem TOML file. Keys: name, mu, du_km, tu_s, mass_unit_kg,
/// m0_kg, fuel_kg, isp_s, tmax_n, x0, xf, period_tf, tau_s_max, planar,
/// correct_orbits, n_orb.
ProblemDefinition load_problem_definition(const std::string& path);
ProblemDefinition parse_problem_definition(const std::string& toml_text,
                                           const std::string& source = "<string>");

}  // namespace trajmc
