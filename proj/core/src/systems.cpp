#include "trajmc/systems.hpp"

#include <cmath>
#include <string>

#include "trajmc/errors.hpp"

namespace trajmc {

void CR3BPSystem::validate() const {
  if (!(mu > 0.0 && mu < 0.5)) {
    throw DomainError("mass ratio must lie in (0, 0.5), got " + std::to_string(mu));
  }
  if (!(du_km > 0.0 && tu_s > 0.0 && mass_unit_kg > 0.0)) {
    throw DomainError("natural units must be positive");
  }
}

CR3BPSystem jupiter_europa() { return {2.528e-5, 670900.0, 48822.76, 1.898e27}; }

CR3BPSystem saturn_titan() { return {2.366e-4, 1221870.0, 219277.51, 5.685e26}; }

void SpacecraftParams::validate() const {
  if (!(m0_kg > fuel_mass_kg && fuel_mass_kg > 0.0)) {
    throw DomainError("spacecraft requires m0 > fuel mass > 0");
  }
  if (!(t_max > 0.0) || !(c > 0.0) || !(m0 > 0.0)) {
    throw DomainError("spacecraft requires positive thrust, exhaust velocity and mass");
  }
}

SpacecraftParams SpacecraftParams::from_si(const CR3BPSystem& sys, double m0_kg,
                                           double fuel_mass_kg, double isp_s, double tmax_n) {
  SpacecraftParams sc;
  sc.m0 = 1.0;
  sc.m0_kg = m0_kg;
  sc.fuel_mass_kg = fuel_mass_kg;
  sc.t_max = tmax_n / (m0_kg * sys.acceleration_unit_ms2());
  sc.c = isp_s * kStandardGravity / sys.velocity_unit_ms();
  return sc;
}

double homotopy_mu(double h) {
  if (!(h >= 0.0 && h <= 1.0)) {
    throw DomainError("homotopy parameter outside [0, 1]: " + std::to_string(h));
  }
  return kMuJupiterEuropaHomotopy + h * (kMuSaturnTitanHomotopy - kMuJupiterEuropaHomotopy);
}

double homotopy_h(double mu) {
  return (mu - kMuJupiterEuropaHomotopy) / (kMuSaturnTitanHomotopy - kMuJupiterEuropaHomotopy);
}

CR3BPSystem interpolate_system(double h, const std::optional<HomotopyEndpoints>& endpoints) {
  if (!endpoints) {
    throw ConfigError("homotopy endpoints are not configured");
  }
  const double mu = homotopy_mu(h);
  if (h == 0.0) return endpoints->start;
  if (h == 1.0) return endpoints->end;
  const auto lerp = [h](double a, double b) { return a + h * (b - a); };
  CR3BPSystem sys;
  sys.mu = mu;
  sys.du_km = lerp(endpoints->start.du_km, endpoints->end.du_km);
  sys.tu_s = lerp(endpoints->start.tu_s, endpoints->end.tu_s);
  sys.mass_unit_kg = lerp(endpoints->start.mass_unit_kg, endpoints->end.mass_unit_kg);
  return sys;
}

}  // namespace trajmc
