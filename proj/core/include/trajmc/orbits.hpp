#pragma once

#include <vector>

#include "trajmc/rk54.hpp"
#include "trajmc/types.hpp"

namespace trajmc {

struct OrbitSample {
  double tau_f = 0.0;
  Vec6 x;
};

/// Planar periodic orbit with a perpendicular r1-axis crossing at x0.
struct PeriodicOrbit {
  Vec6 x0 = Vec6::Zero();
  double period = 0.0;
  std::vector<OrbitSample> samples;
};

struct DroCorrectionSettings {
  double v1_tol = 1e-10;
  int max_iterations = 50;
  double max_half_period = 20.0;  // TU
  IntegratorSettings integrator{};
};

/// Natural (uncontrolled) CR3BP flow of a 6-state.
Vec6 natural_rhs(const Vec6& x, double mu);
Vec6 propagate_natural(const Vec6& x0, double mu, double duration,
                       const IntegratorSettings& settings = {});

/// Result of propagating to the next r2 = 0 crossing.
struct HalfPeriodCrossing {
  double t = 0.0;
  Vec6 x;
  Mat6 stm;  // d x(t) / d x(0)
};

HalfPeriodCrossing propagate_to_axis_crossing(const Vec6& x0, double mu,
                                              const DroCorrectionSettings& settings = {});

/// Newton correction of v2 at the r1-axis crossing so that the orbit closes.
PeriodicOrbit correct_dro(double r1_crossing, double v2_guess, double mu,
                          const DroCorrectionSettings& settings = {});

/// n_orb states equally spaced in time, tagged with tau_f.
std::vector<OrbitSample> discretize_orbit(const PeriodicOrbit& orbit, int n_orb, double mu,
                                          const IntegratorSettings& settings = {});

}  // namespace trajmc
