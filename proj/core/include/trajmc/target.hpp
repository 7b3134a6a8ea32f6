#pragma once

#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "trajmc/screening.hpp"
#include "trajmc/variational.hpp"

namespace trajmc {

/// One evaluation of an (unnormalized) log target density.
struct Evaluation {
  double log_density = -std::numeric_limits<double>::infinity();
  bool ok = false;
  /// Screening summary for trajectory targets (record dropped after use).
  ScreeningResult screening;
};

struct GradientResult {
  VecX grad_j;         // gradient of the frozen-time objective
  VecX grad_log;       // gradient of log pi
  double tau_s = 0.0;  // frozen times
  double tau_f = 0.0;
  bool degenerate = true;
};

/// Interface the samplers draw from.
class Target {
 public:
  virtual ~Target() = default;
  virtual int dim() const = 0;
  virtual Evaluation evaluate(const VecX& lambda) const = 0;
  virtual GradientResult gradient(const VecX& lambda, const Evaluation& at) const = 0;
};

/// pi(lambda) = exp(-beta J*(lambda)) for a screening context.
class TargetDensity final : public Target {
 public:
  TargetDensity(std::shared_ptr<const ScreeningContext> ctx, double beta);

  int dim() const override { return ctx_->problem.costate_dim(); }
  double beta() const { return beta_; }
  const ScreeningContext& context() const { return *ctx_; }

  /// -beta J*; -inf when screening fails.
  double log_density(const CostateSample& lambda) const;

  Evaluation evaluate(const VecX& lambda) const override;

  /// Frozen-time gradient from the STM chain at the cached optimum.
  GradientResult grad_log_density(const CostateSample& lambda, const ScreeningResult& cached) const;

  GradientResult gradient(const VecX& lambda, const Evaluation& at) const override {
    return grad_log_density(lambda, at.screening);
  }

 private:
  std::shared_ptr<const ScreeningContext> ctx_;
  double beta_;
};

/// Terms of the frozen-time objective J^k(lambda) at fixed (node time,
/// orbit sample).
struct FrozenObjective {
  double j = 0.0;
  double e = 0.0;
  VecX e_vec;
  double m_final = 0.0;
};

/// Evaluates J^k by propagating to `tau_s` and comparing with orbit sample
/// `orbit_sample`. The kappa2 tau_s term is constant and included.
FrozenObjective frozen_objective(const CostateSample& lambda, const ScreeningContext& ctx,
                                 double tau_s, std::size_t orbit_sample);

/// Analytic gradient of J^k from STM sensitivities.
VecX frozen_objective_gradient(const Sensitivities& s, const VecX& e_vec, double e, double kappa1,
                               double m0);

/// R = a exp(-b J*).
inline double reward(double j_star, double a, double b) { return a * std::exp(-b * j_star); }

struct RewardCalibration {
  double a = 1.0;
  double b = 0.0;
  bool degenerate = false;  // zero J* range: uniform weights
};

/// Chooses (a, b) so rewards span [0.1, 1] over `j_values`.
RewardCalibration calibrate_reward(const std::vector<double>& j_values);

}  // namespace trajmc
