#include "trajmc/orbits.hpp"

#include <cmath>
#include <string>

#include "trajmc/dynamics.hpp"

namespace trajmc {
namespace {

using NaturalStm = Eigen::Matrix<double, 6, 7>;

Mat6 natural_jacobian(const Vec6& x, double mu) {
  Mat6 a = Mat6::Zero();
  a.block<3, 3>(0, 3) = Mat3::Identity();
  a.block<3, 3>(3, 0) = gravity_gradient(x.head<3>(), mu);
  a.block<3, 3>(3, 3) = coriolis_matrix();
  return a;
}

}  // namespace

Vec6 natural_rhs(const Vec6& x, double mu) {
  Vec6 d;
  d.head<3>() = x.tail<3>();
  d.tail<3>() = cr3bp_accel(x.head<3>(), x.tail<3>(), mu);
  return d;
}

Vec6 propagate_natural(const Vec6& x0, double mu, double duration,
                       const IntegratorSettings& settings) {
  if (duration == 0.0) return x0;
  if (duration < 0.0) throw DomainError("propagate_natural needs a non-negative duration");
  auto f = [mu](double, const Vec6& x) -> Vec6 { return natural_rhs(x, mu); };
  Dopri54<Vec6, decltype(f)> stepper(f, settings);
  stepper.reset(0.0, x0);
  while (stepper.t() < duration) stepper.step(duration);
  return stepper.y();
}

HalfPeriodCrossing propagate_to_axis_crossing(const Vec6& x0, double mu,
                                              const DroCorrectionSettings& settings) {
  auto f = [mu](double, const NaturalStm& b) -> NaturalStm {
    const Vec6 x = b.col(0);
    NaturalStm d;
    d.col(0) = natural_rhs(x, mu);
    d.rightCols<6>().noalias() = natural_jacobian(x, mu) * b.rightCols<6>();
    return d;
  };
  NaturalStm b0;
  b0.col(0) = x0;
  b0.rightCols<6>() = Mat6::Identity();
  Dopri54<NaturalStm, decltype(f)> stepper(f, settings.integrator);
  stepper.reset(0.0, b0);

  // The first step leaves the axis; its sign of r2 is the one to watch.
  double side = 0.0;
  while (stepper.t() < settings.max_half_period) {
    const auto& dense = stepper.step(settings.max_half_period);
    const double r2 = stepper.y()(1, 0);
    if (side == 0.0) {
      side = r2 > 0.0 ? 1.0 : -1.0;
      continue;
    }
    if (r2 * side > 0.0) continue;

    const double ra = dense.rcont[0](1, 0);
    const double t_cross = refine_root([&dense](double t) { return dense.col0_at(t)(1); },
                                       dense.t0, dense.t1(), ra, r2, 1e-13,
                                       settings.integrator.max_refine_iterations);
    const NaturalStm b = dense.at(t_cross);
    return {t_cross, b.col(0), b.rightCols<6>()};
  }
  throw GeometryError("no r2 = 0 recrossing within " +
                      std::to_string(settings.max_half_period) + " TU");
}

PeriodicOrbit correct_dro(double r1_crossing, double v2_guess, double mu,
                          const DroCorrectionSettings& settings) {
  Vec6 x0 = Vec6::Zero();
  x0(0) = r1_crossing;
  x0(4) = v2_guess;
  for (int it = 0; it < settings.max_iterations; ++it) {
    const HalfPeriodCrossing hc = propagate_to_axis_crossing(x0, mu, settings);
    const double v1 = hc.x(3);
    if (std::abs(v1) < settings.v1_tol) {
      return {x0, 2.0 * hc.t, {}};
    }
    // The crossing time moves with v2(0); project it out through r2 = 0.
    const Vec6 xdot = natural_rhs(hc.x, mu);
    const double dv1 = hc.stm(3, 4) - xdot(3) * hc.stm(1, 4) / xdot(1);
    if (!std::isfinite(dv1) || dv1 == 0.0) {
      throw CorrectionError("singular DRO correction derivative");
    }
    x0(4) -= v1 / dv1;
  }
  throw CorrectionError("DRO correction did not converge in " +
                        std::to_string(settings.max_iterations) + " iterations");
}

std::vector<OrbitSample> discretize_orbit(const PeriodicOrbit& orbit, int n_orb, double mu,
                                          const IntegratorSettings& settings) {
  if (n_orb < 1) throw DomainError("n_orb must be positive");
  if (!(orbit.period > 0.0)) throw DomainError("orbit period must be positive");
  std::vector<OrbitSample> out;
  out.reserve(static_cast<std::size_t>(n_orb));
  out.push_back({0.0, orbit.x0});
  if (n_orb == 1) return out;

  const double dt = orbit.period / n_orb;
  const double t_last = dt * (n_orb - 1);
  auto f = [mu](double, const Vec6& x) -> Vec6 { return natural_rhs(x, mu); };
  Dopri54<Vec6, decltype(f)> stepper(f, settings);
  stepper.reset(0.0, orbit.x0);
  int k = 1;
  while (k < n_orb) {
    const auto& dense = stepper.step(t_last);
    while (k < n_orb && dt * k <= dense.t1()) {
      const double t = dt * k;
      out.push_back({t, dense.at(t)});
      ++k;
    }
  }
  return out;
}

}  // namespace trajmc
