#include "trajmc/problem.hpp"

#include "trajmc/errors.hpp"

namespace trajmc {
namespace {

PeriodicOrbit orbit_from(const Vec6& crossing, double period, double mu, bool correct,
                         const DroCorrectionSettings& dro) {
  if (correct) return correct_dro(crossing(0), crossing(4), mu, dro);
  return {crossing, period, {}};
}

TransferProblem assemble(const CR3BPSystem& sys, const SpacecraftParams& sc, const Vec6& x0,
                         const Vec6& xf, const ProblemDefinition& def,
                         const DroCorrectionSettings& dro) {
  sys.validate();
  sc.validate();
  TransferProblem p;
  p.system = sys;
  p.sc = sc;
  p.departure = orbit_from(x0, 0.0, sys.mu, def.correct_orbits, dro);
  p.target = orbit_from(xf, def.period_tf, sys.mu, def.correct_orbits, dro);
  p.target.samples = discretize_orbit(p.target, def.n_orb, sys.mu, dro.integrator);
  p.x0.head<6>() = p.departure.x0;
  p.x0(6) = sc.m0;
  p.tau_s_max = def.tau_s_max;
  p.planar = def.planar;
  if (p.planar && (p.x0(2) != 0.0 || p.x0(5) != 0.0)) {
    throw ConfigError("planar problem with out-of-plane initial state");
  }
  return p;
}

SpacecraftParams spacecraft(const ProblemDefinition& def) {
  return SpacecraftParams::from_si(def.system, def.m0_kg, def.fuel_kg, def.isp_s, def.tmax_n);
}

// Moves a crossing state so that its offset from the secondary is kept.
Vec6 shift_crossing(const Vec6& a, double mu_a, const Vec6& b, double mu_b, double h,
                    double mu) {
  Vec6 x = Vec6::Zero();
  const double off_a = a(0) - (1.0 - mu_a);
  const double off_b = b(0) - (1.0 - mu_b);
  x(0) = 1.0 - mu + off_a + h * (off_b - off_a);
  x(4) = a(4) + h * (b(4) - a(4));
  return x;
}

}  // namespace

TransferProblem build_problem(const ProblemDefinition& def, const DroCorrectionSettings& dro) {
  TransferProblem p = assemble(def.system, spacecraft(def), def.x0, def.xf, def, dro);
  p.h = 0.0;
  return p;
}

HomotopyFamily::HomotopyFamily(ProblemDefinition start, std::optional<ProblemDefinition> end)
    : start_(std::move(start)), end_(std::move(end)) {}

TransferProblem HomotopyFamily::at(double h, const DroCorrectionSettings& dro) const {
  if (!(h >= 0.0 && h <= 1.0)) throw DomainError("homotopy parameter outside [0, 1]");
  const SpacecraftParams sc = spacecraft(start_);
  if (h == 0.0) {
    TransferProblem p = build_problem(start_, dro);
    return p;
  }
  if (!end_) throw ConfigError("homotopy end problem not configured");

  const ProblemDefinition& end = *end_;
  TransferProblem p;
  if (h == 1.0) {
    p = assemble(end.system, sc, end.x0, end.xf, end, dro);
  } else {
    const CR3BPSystem sys = interpolate_system(h, HomotopyEndpoints{start_.system, end.system});
    ProblemDefinition mid = start_;
    mid.system = sys;
    mid.period_tf = start_.period_tf + h * (end.period_tf - start_.period_tf);
    const Vec6 x0 = shift_crossing(start_.x0, start_.system.mu, end.x0, end.system.mu, h, sys.mu);
    const Vec6 xf = shift_crossing(start_.xf, start_.system.mu, end.xf, end.system.mu, h, sys.mu);
    p = assemble(sys, sc, x0, xf, mid, dro);
  }
  p.h = h;
  return p;
}

}  // namespace trajmc
