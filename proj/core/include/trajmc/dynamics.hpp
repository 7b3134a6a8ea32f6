#pragma once

#include "trajmc/systems.hpp"
#include "trajmc/types.hpp"

namespace trajmc {

/// Distances below this to either primary are treated as a collision.
inline constexpr double kSingularityRadius = 1e-8;
/// Primer-vector norms below this make the thrust direction undefined.
inline constexpr double kDegeneratePrimer = 1e-12;

/// Everything the controlled vector field depends on.
struct DynamicsParams {
  double mu = 0.0;
  double t_max = 0.0;
  double c = 1.0;

  static DynamicsParams from(const CR3BPSystem& sys, const SpacecraftParams& sc) {
    return {sys.mu, sc.t_max, sc.c};
  }
};

/// Rotating-frame CR3BP acceleration including Coriolis terms.
Vec3 cr3bp_accel(const Vec3& r, const Vec3& v, double mu);

/// G = dg/dr, the symmetric Hessian of the effective potential.
Mat3 gravity_gradient(const Vec3& r, double mu);

/// H = dg/dv, the constant Coriolis matrix.
Mat3 coriolis_matrix();

/// d(G^T lambda_v)/dr for fixed lambda_v.
Mat3 gravity_gradient_contraction_derivative(const Vec3& r, const Vec3& lambda_v, double mu);

/// Jacobi constant C = 2U - |v|^2.
double jacobi_constant(const Vec3& r, const Vec3& v, double mu);

/// S = |lambda_v| + lambda_m * m / c. Positive S means thrust.
inline double switching_function(double lambda_v_norm, double lambda_m, double m, double c) {
  return lambda_v_norm + lambda_m * m / c;
}

/// Switching function of an augmented state.
double switching_function(const Vec14& y, double c);

struct Control {
  Vec3 direction;  // unit vector -lambda_v/|lambda_v|
  int throttle;    // 0 or 1
};

/// Bang-bang control. S == 0 is left to the event machinery and maps to coast.
Control control_law(const Vec3& lambda_v, double s);

/// Time derivative of the combined state/costate vector.
Vec14 augmented_rhs(const Vec14& y, const DynamicsParams& p, bool thrust_on);

/// A = d(augmented_rhs)/dy.
Mat14 jacobian(const Vec14& y, const DynamicsParams& p, bool thrust_on);

/// Hamiltonian with the optimal thrust direction substituted, for thrust T.
double hamiltonian(const Vec14& y, const DynamicsParams& p, double thrust);

/// Assembles y from a 7-state and free costates with lambda_m = -1.
/// Planar samples (size 4) fill lambda_r1, lambda_r2, lambda_v1, lambda_v2.
Vec14 make_augmented_state(const Vec7& x0, const CostateSample& lambda);

}  // namespace trajmc
