#pragma once

#include <memory>
#include <vector>

#include "trajmc/kdtree.hpp"
#include "trajmc/orbits.hpp"
#include "trajmc/problem.hpp"
#include "trajmc/propagate.hpp"

namespace trajmc {

inline constexpr double kDefaultFeasibilityTol = 5e-5;

struct ScreeningParams {
  double kappa1 = 1.0;
  double kappa2 = 1e-6;  // 1/TU
  double tau_s_max = 90.0;
  int n_orb = 2000;

  void validate() const;
};

/// Nearest-neighbour index over the discretized target orbit in (r, v)
/// space: 4-dim (r1, r2, v1, v2) for planar problems, 6-dim otherwise.
class OrbitIndex {
 public:
  struct Match {
    std::size_t sample = 0;
    double tau_f = 0.0;
    double dist2 = 0.0;
  };

  OrbitIndex() = default;
  OrbitIndex(std::vector<OrbitSample> samples, bool planar);

  Match nearest(const Vec6& rv) const;
  const std::vector<OrbitSample>& samples() const { return samples_; }
  bool planar() const { return planar_; }
  int dim() const { return planar_ ? 4 : 6; }

  /// Projection of a 6-state onto the index coordinates.
  VecX project(const Vec6& rv) const;

 private:
  std::vector<OrbitSample> samples_;
  KdTree tree_;
  bool planar_ = true;
};

OrbitIndex build_orbit_index(const std::vector<OrbitSample>& samples, bool planar);

/// Problem, index and weights shared read-only by every chain.
struct ScreeningContext {
  TransferProblem problem;
  OrbitIndex index;
  ScreeningParams params;
  IntegratorSettings integrator{};

  static std::shared_ptr<const ScreeningContext> make(TransferProblem problem,
                                                      ScreeningParams params,
                                                      IntegratorSettings integrator = {});
};

struct ScreeningResult {
  double j_star = 0.0;
  double tau_s_opt = 0.0;
  double tau_f_opt = 0.0;
  double e = 0.0;
  VecX e_vec;           // target minus achieved, index coordinates
  double delta_m = 0.0; // m0 - m(tau_s_opt), NU
  std::size_t node = 0;         // trajectory node index of tau_s_opt
  std::size_t orbit_sample = 0; // orbit sample index of tau_f_opt
  int n_switches = 0;
  bool truncated = false;       // propagation ended early (fuel exhaustion)
  std::shared_ptr<const TrajectoryRecord> record;
};

/// J*(lambda): propagates for tau_s_max and minimises the blended objective
/// over (trajectory node, orbit sample) pairs. Fuel exhaustion truncates the
/// tau_s range; other propagation failures propagate as PropagationError.
ScreeningResult evaluate_objective(const CostateSample& lambda, const ScreeningContext& ctx);

/// Minimisation over an existing record (exposed for testing and reuse).
ScreeningResult screen_record(std::shared_ptr<const TrajectoryRecord> record,
                              const ScreeningContext& ctx);

/// Index-space (r, v) of an augmented state.
Vec6 position_velocity(const Vec14& y);

inline bool is_feasible(const ScreeningResult& r, double tol = kDefaultFeasibilityTol) {
  return r.e < tol;
}
inline bool is_feasible(double e, double tol = kDefaultFeasibilityTol) { return e < tol; }

}  // namespace trajmc
