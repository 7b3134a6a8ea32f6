#include "trajmc/screening.hpp"

#include <cmath>
#include <limits>

#include "trajmc/errors.hpp"

namespace trajmc {

void ScreeningParams::validate() const {
  if (!(kappa1 >= 0.0) || !(kappa2 >= 0.0)) throw ConfigError("kappa1 and kappa2 must be >= 0");
  if (!(tau_s_max > 0.0)) throw ConfigError("tau_s_max must be positive");
  if (n_orb < 1) throw ConfigError("n_orb must be positive");
}

Vec6 position_velocity(const Vec14& y) { return y.head<6>(); }

OrbitIndex::OrbitIndex(std::vector<OrbitSample> samples, bool planar)
    : samples_(std::move(samples)), planar_(planar) {
  if (samples_.empty()) throw DomainError("orbit index needs at least one sample");
  const int k = dim();
  std::vector<double> pts;
  pts.reserve(samples_.size() * static_cast<std::size_t>(k));
  for (const auto& s : samples_) {
    const VecX p = project(s.x);
    pts.insert(pts.end(), p.data(), p.data() + k);
  }
  tree_ = KdTree(std::move(pts), k);
}

VecX OrbitIndex::project(const Vec6& rv) const {
  if (!planar_) return rv;
  VecX p(4);
  p << rv(0), rv(1), rv(3), rv(4);
  return p;
}

OrbitIndex::Match OrbitIndex::nearest(const Vec6& rv) const {
  const VecX q = project(rv);
  const auto hit = tree_.nearest({q.data(), static_cast<std::size_t>(q.size())});
  return {hit.index, samples_[hit.index].tau_f, hit.dist2};
}

OrbitIndex build_orbit_index(const std::vector<OrbitSample>& samples, bool planar) {
  return OrbitIndex(samples, planar);
}

std::shared_ptr<const ScreeningContext> ScreeningContext::make(TransferProblem problem,
                                                               ScreeningParams params,
                                                               IntegratorSettings integrator) {
  params.validate();
  if (problem.target.samples.empty()) throw ConfigError("target orbit is not discretized");
  auto ctx = std::make_shared<ScreeningContext>();
  ctx->index = build_orbit_index(problem.target.samples, problem.planar);
  ctx->problem = std::move(problem);
  ctx->params = params;
  ctx->integrator = integrator;
  return ctx;
}

ScreeningResult screen_record(std::shared_ptr<const TrajectoryRecord> record,
                              const ScreeningContext& ctx) {
  if (!record || record->empty()) throw DomainError("screening an empty trajectory");
  const double m0 = ctx.problem.sc.m0;
  const double k1 = ctx.params.kappa1;
  const double k2 = ctx.params.kappa2;
  const double tau_max = ctx.params.tau_s_max;

  ScreeningResult best;
  best.j_star = std::numeric_limits<double>::infinity();
  OrbitIndex::Match best_match;
  for (std::size_t i = 0; i < record->nodes.size(); ++i) {
    const auto& node = record->nodes[i];
    const double tau_s = node.t - record->t0;
    if (tau_s > tau_max) break;
    const auto match = ctx.index.nearest(position_velocity(node.y));
    const double e = std::sqrt(match.dist2);
    const double dm = m0 - node.y(idx::m);
    const double j = e + k1 * (dm / m0 + k2 * tau_s);
    if (j < best.j_star) {
      best.j_star = j;
      best.tau_s_opt = tau_s;
      best.e = e;
      best.delta_m = dm;
      best.node = i;
      best_match = match;
    }
  }
  if (!std::isfinite(best.j_star)) throw DomainError("objective is not finite on any node");

  best.orbit_sample = best_match.sample;
  best.tau_f_opt = best_match.tau_f;
  const auto& target = ctx.index.samples()[best_match.sample].x;
  best.e_vec = ctx.index.project(target) -
               ctx.index.project(position_velocity(record->nodes[best.node].y));
  best.n_switches = static_cast<int>(record->switches.size());
  best.record = std::move(record);
  return best;
}

ScreeningResult evaluate_objective(const CostateSample& lambda, const ScreeningContext& ctx) {
  if (lambda.size() != ctx.problem.costate_dim()) {
    throw ShapeMismatchError("costate sample has the wrong dimension");
  }
  if (!lambda.allFinite()) throw DomainError("costate sample is not finite");
  const Vec14 y0 = make_augmented_state(ctx.problem.x0, lambda);
  const DynamicsParams dyn = ctx.problem.dynamics();
  try {
    auto rec = std::make_shared<const TrajectoryRecord>(
        integrate(y0, dyn, 0.0, ctx.params.tau_s_max, ctx.problem.sc.dry_mass(), ctx.integrator));
    return screen_record(std::move(rec), ctx);
  } catch (const PropagationError& e) {
    if (e.cause() != PropagationError::Cause::FuelExhausted) throw;
    auto res = screen_record(std::make_shared<const TrajectoryRecord>(e.partial()), ctx);
    res.truncated = true;
    return res;
  }
}

}  // namespace trajmc
