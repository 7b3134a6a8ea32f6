#pragma once

#include <optional>

#include "trajmc/types.hpp"

namespace trajmc {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

/// Mass ratios used by the homotopy map h(mu).
inline constexpr double kMuJupiterEuropaHomotopy = 2.525e-5;
inline constexpr double kMuSaturnTitanHomotopy = 2.366e-4;

/// One CR3BP instance and its natural units.
struct CR3BPSystem {
  double mu = 0.0;
  double du_km = 0.0;
  double tu_s = 0.0;
  double mass_unit_kg = 0.0;

  /// Throws DomainError unless 0 < mu < 0.5 and all units are positive.
  void validate() const;

  double velocity_unit_ms() const { return du_km * 1000.0 / tu_s; }
  double acceleration_unit_ms2() const { return du_km * 1000.0 / (tu_s * tu_s); }

  double distance_to_si(double du) const { return du * du_km * 1000.0; }
  double distance_from_si(double m) const { return m / (du_km * 1000.0); }
  double time_to_si(double tu) const { return tu * tu_s; }
  double time_from_si(double s) const { return s / tu_s; }
  double velocity_to_si(double nu) const { return nu * velocity_unit_ms(); }
  double velocity_from_si(double ms) const { return ms / velocity_unit_ms(); }

  friend bool operator==(const CR3BPSystem&, const CR3BPSystem&) = default;
};

/// Jupiter-Europa natural units.
CR3BPSystem jupiter_europa();
/// Saturn-Titan natural units.
CR3BPSystem saturn_titan();

/// Thruster and mass parameters. Spacecraft masses are normalized by the
/// initial mass, so m0 is 1 in natural units.
struct SpacecraftParams {
  double m0 = 1.0;        // NU
  double m0_kg = 0.0;
  double fuel_mass_kg = 0.0;
  double t_max = 0.0;     // NU force (m0 * DU / TU^2)
  double c = 0.0;         // NU velocity

  double dry_mass() const { return m0 * (m0_kg - fuel_mass_kg) / m0_kg; }
  double mass_to_kg(double m) const { return m * m0_kg / m0; }

  void validate() const;

  /// Converts SI thruster data to natural units of `sys`.
  static SpacecraftParams from_si(const CR3BPSystem& sys, double m0_kg, double fuel_mass_kg,
                                  double isp_s, double tmax_n);
};

/// h -> mu along the Jupiter-Europa to Saturn-Titan homotopy.
double homotopy_mu(double h);

/// Inverse map mu -> h.
double homotopy_h(double mu);

/// The two systems a homotopy runs between.
struct HomotopyEndpoints {
  CR3BPSystem start;
  CR3BPSystem end;
};

/// System at homotopy parameter h. Endpoints are returned verbatim; interior
/// points interpolate the units linearly and take mu from homotopy_mu.
CR3BPSystem interpolate_system(double h, const std::optional<HomotopyEndpoints>& endpoints);

}  // namespace trajmc
