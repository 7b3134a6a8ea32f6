#include "trajmc/target.hpp"

#include <algorithm>
#include <cmath>

#include "trajmc/errors.hpp"

namespace trajmc {
namespace {

constexpr double kZeroViolation = 1e-12;

Vec14 propagate_to(const CostateSample& lambda, const ScreeningContext& ctx, double tau_s) {
  const Vec14 y0 = make_augmented_state(ctx.problem.x0, lambda);
  if (tau_s <= 0.0) return y0;
  const auto rec = integrate(y0, ctx.problem.dynamics(), 0.0, tau_s, ctx.problem.sc.dry_mass(),
                             ctx.integrator);
  return rec.back().y;
}

}  // namespace

TargetDensity::TargetDensity(std::shared_ptr<const ScreeningContext> ctx, double beta)
    : ctx_(std::move(ctx)), beta_(beta) {
  if (!ctx_) throw ConfigError("target density needs a screening context");
  if (!(beta_ > 0.0)) throw ConfigError("beta must be positive");
}

double TargetDensity::log_density(const CostateSample& lambda) const {
  return evaluate(lambda).log_density;
}

Evaluation TargetDensity::evaluate(const VecX& lambda) const {
  Evaluation ev;
  try {
    ev.screening = evaluate_objective(lambda, *ctx_);
  } catch (const Error&) {
    return ev;
  }
  ev.screening.record.reset();
  ev.log_density = -beta_ * ev.screening.j_star;
  ev.ok = std::isfinite(ev.log_density);
  if (!ev.ok) ev.log_density = -std::numeric_limits<double>::infinity();
  return ev;
}

GradientResult TargetDensity::grad_log_density(const CostateSample& lambda,
                                               const ScreeningResult& cached) const {
  GradientResult g;
  g.tau_s = cached.tau_s_opt;
  g.tau_f = cached.tau_f_opt;
  const auto& prob = ctx_->problem;
  Mat14 product = Mat14::Identity();
  try {
    if (cached.tau_s_opt > 0.0) {
      const Vec14 y0 = make_augmented_state(prob.x0, lambda);
      const auto [rec, chain] = propagate_with_stm(y0, prob.dynamics(), 0.0, cached.tau_s_opt,
                                                   prob.sc.dry_mass(), ctx_->integrator);
      product = assemble_chain(chain);
    }
  } catch (const Error&) {
    return g;
  }
  const Sensitivities s = extract_sensitivities(product, prob.planar);
  g.grad_j = frozen_objective_gradient(s, cached.e_vec, cached.e, ctx_->params.kappa1, prob.sc.m0);
  g.grad_log = -beta_ * g.grad_j;
  g.degenerate = !g.grad_log.allFinite();
  return g;
}

FrozenObjective frozen_objective(const CostateSample& lambda, const ScreeningContext& ctx,
                                 double tau_s, std::size_t orbit_sample) {
  if (orbit_sample >= ctx.index.samples().size()) throw DomainError("orbit sample out of range");
  const Vec14 y = propagate_to(lambda, ctx, tau_s);
  FrozenObjective f;
  f.e_vec = ctx.index.project(ctx.index.samples()[orbit_sample].x) -
            ctx.index.project(position_velocity(y));
  f.e = f.e_vec.norm();
  f.m_final = y(idx::m);
  const double m0 = ctx.problem.sc.m0;
  f.j = f.e + ctx.params.kappa1 * ((m0 - f.m_final) / m0 + ctx.params.kappa2 * tau_s);
  return f;
}

VecX frozen_objective_gradient(const Sensitivities& s, const VecX& e_vec, double e, double kappa1,
                               double m0) {
  if (e_vec.size() != s.g1.rows()) throw ShapeMismatchError("e_vec does not match G1 rows");
  VecX g = (kappa1 / m0) * s.g2.transpose();
  // The norm has no gradient at e = 0; the feasibility term is dropped there.
  if (e >= kZeroViolation) g.noalias() += s.g1.transpose() * e_vec / e;
  return g;
}

RewardCalibration calibrate_reward(const std::vector<double>& j_values) {
  RewardCalibration r;
  if (j_values.empty()) {
    r.degenerate = true;
    return r;
  }
  const auto [lo, hi] = std::minmax_element(j_values.begin(), j_values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0) || !std::isfinite(range)) {
    r.degenerate = true;
    return r;
  }
  r.b = std::log(10.0) / range;
  r.a = std::exp(r.b * *lo);
  return r;
}

}  // namespace trajmc
