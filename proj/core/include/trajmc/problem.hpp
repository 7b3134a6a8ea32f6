#pragma once

#include <memory>
#include <optional>
#include <string>

#include "trajmc/dynamics.hpp"
#include "trajmc/orbits.hpp"
#include "trajmc/systems.hpp"

namespace trajmc {

/// Raw problem definition as read from a TOML file (Table-1 style keys).
struct ProblemDefinition {
  std::string name;
  CR3BPSystem system;
  double m0_kg = 0.0;
  double fuel_kg = 0.0;
  double isp_s = 0.0;
  double tmax_n = 0.0;
  Vec6 x0 = Vec6::Zero();   // departure DRO crossing (r1 > 1 - mu)
  Vec6 xf = Vec6::Zero();   // arrival DRO crossing
  double period_tf = 0.0;   // reference period of the arrival DRO [TU]
  double tau_s_max = 0.0;
  bool planar = true;
  bool correct_orbits = true;
  int n_orb = 2000;
};

/// Fully prepared transfer: corrected orbits and NU spacecraft parameters.
struct TransferProblem {
  CR3BPSystem system;
  SpacecraftParams sc;
  Vec7 x0 = Vec7::Zero();
  PeriodicOrbit departure;
  PeriodicOrbit target;
  double tau_s_max = 0.0;
  bool planar = true;
  double h = 0.0;  // homotopy parameter this instance belongs to

  DynamicsParams dynamics() const { return DynamicsParams::from(system, sc); }
  int costate_dim() const { return planar ? 4 : 6; }
};

/// Builds a transfer from a definition. With correct_orbits the departure
/// and arrival DROs are differentially corrected from the given crossings.
TransferProblem build_problem(const ProblemDefinition& def,
                              const DroCorrectionSettings& dro = {});

/// Homotopy family between two problem definitions. Spacecraft NU
/// parameters come from `start`; DRO crossing offsets r1 - (1 - mu) and the
/// v2 guesses are interpolated linearly in h before correction.
class HomotopyFamily {
 public:
  HomotopyFamily(ProblemDefinition start, std::optional<ProblemDefinition> end);

  TransferProblem at(double h, const DroCorrectionSettings& dro = {}) const;
  bool has_end() const { return end_.has_value(); }
  const ProblemDefinition& start() const { return start_; }

 private:
  ProblemDefinition start_;
  std::optional<ProblemDefinition> end_;
};

}  // namespace trajmc
