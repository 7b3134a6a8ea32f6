#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajmc/rng.hpp"
#include "trajmc/target.hpp"

namespace trajmc {

enum class Algorithm { Rwm, Mala, Hmc };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ProposalParams {
  VecX sigma;          // proposal std devs, Sigma = Diag(sigma^2)
  double epsilon = 0;  // gradient timestep
  int leapfrog = 1;
  double beta = 1e4;   // target scaling (informational; lives in the target)

  void validate(Algorithm algo) const;
};

struct ChainStats {
  long proposals = 0;
  long accepts = 0;
  long objective_evals = 0;
  long gradient_evals = 0;
  long refresh_objective_evals = 0;
  long refresh_gradient_evals = 0;
  long failures = 0;
  long degenerate_drifts = 0;
  int consecutive_failures = 0;
  bool dead = false;
};

struct ChainState {
  int id = 0;
  VecX lambda;
  Evaluation cached;
  GradientResult cached_grad;
  bool has_grad = false;
  ChainStats stats;
};

struct StepOutcome {
  bool accepted = false;
  double log_accept_ratio = 0.0;
  VecX proposal;
  bool evaluation_failed = false;
};

/// Unit-normalized gradient of log pi, or zero when degenerate.
VecX normalized_gradient(const GradientResult& g);

/// MALA proposal mean + Sigma^{1/2} xi.
VecX mala_proposal(const VecX& lambda, const VecX& unit_grad, const ProposalParams& p,
                   const VecX& xi);

/// First leapfrog step of the normalized-gradient HMC with dt = epsilon and
/// M = epsilon^2 Sigma^{-1}, momentum p = sqrt(M) xi.
VecX hmc_first_position(const VecX& lambda, const VecX& unit_grad, const ProposalParams& p,
                        const VecX& xi);

/// Gaussian log proposal density log q(to; from) up to a constant.
double log_q(const VecX& to, const VecX& from, const VecX& unit_grad_from,
             const ProposalParams& p);

StepOutcome rwm_step(ChainState& chain, const Target& target, const ProposalParams& p,
                     KeyedRng& rng);
StepOutcome mala_step(ChainState& chain, const Target& target, const ProposalParams& p,
                      KeyedRng& rng);
StepOutcome hmc_step(ChainState& chain, const Target& target, const ProposalParams& p,
                     KeyedRng& rng);

/// Dispatch on algorithm.
StepOutcome sampler_step(Algorithm algo, ChainState& chain, const Target& target,
                         const ProposalParams& p, KeyedRng& rng);

/// Evaluates the chain's cache at its current lambda (refresh accounting).
void refresh_cache(ChainState& chain, const Target& target, bool need_gradient);

/// Analytic diagonal Gaussian target, used to validate the kernels.
class DiagonalGaussianTarget final : public Target {
 public:
  DiagonalGaussianTarget(VecX mean, VecX std);
  int dim() const override { return static_cast<int>(mean_.size()); }
  Evaluation evaluate(const VecX& lambda) const override;
  GradientResult gradient(const VecX& lambda, const Evaluation& at) const override;

 private:
  VecX mean_;
  VecX std_;
};

struct Stage {
  double h = 0.0;
  int iterations = 0;
  double sigma_scale = 0.02;
  double epsilon = 0.0;
  int leapfrog = 1;
  double beta = 1e4;
  double kappa1 = 1.0;
  double kappa2 = 1e-6;

  /// True when the target density differs between the two stages.
  bool same_target(const Stage& o) const {
    return h == o.h && beta == o.beta && kappa1 == o.kappa1 && kappa2 == o.kappa2;
  }
};

struct StageSchedule {
  std::vector<Stage> stages;
  int burn_in = 0;  // global iteration threshold

  int total_iterations() const;
  void validate() const;
};

/// Builds the target for a stage. Called once per distinct target.
using TargetFactory = std::function<std::shared_ptr<const Target>(const Stage&)>;

struct SampleRow {
  int chain = 0;
  int iteration = 0;  // 1-based global iteration
  VecX lambda;
  double log_density = 0.0;
  double j_star = 0.0;
  double e = 0.0;
  double delta_m = 0.0;
  double tau_s = 0.0;
  double tau_f = 0.0;
  bool feasible = false;
};

struct TraceRow {
  int iteration = 0;
  double h = 0.0;
  double mean_j_star = 0.0;
  double mean_e = 0.0;
  double mean_dm_over_m0 = 0.0;
  double mean_tau_s = 0.0;
  double acceptance_rate = 0.0;
};

struct EvalCounts {
  long objective = 0;
  long gradient = 0;
  long refresh_objective = 0;
  long refresh_gradient = 0;
};

struct RunOptions {
  Algorithm algorithm = Algorithm::Mala;
  int n_chains = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Fixed sigma_init; empty means the empirical std of the initial samples.
  VecX sigma_init;
  int max_consecutive_failures = 50;
  double m0 = 1.0;
  double feasibility_tol = kDefaultFeasibilityTol;
  /// Checkpoint cadence in iterations (0 disables).
  int checkpoint_every = 0;
  std::string checkpoint_path;
  /// Stop (as if killed) after this many global iterations; -1 runs to end.
  int halt_after = -1;
};

/// Complete sampler state; also the checkpoint payload.
struct RunState {
  std::vector<ChainState> chains;
  std::vector<SampleRow> samples;
  std::vector<TraceRow> traces;
  VecX sigma_init;
  int stage = 0;
  int iteration_in_stage = 0;
  int global_iteration = 0;
  bool caches_valid = false;
  bool completed = false;
};

/// Advances all chains through the schedule. `resume` continues from a
/// checkpointed RunState instead of `init_samples`.
RunState run_chains(const std::vector<VecX>& init_samples, const StageSchedule& schedule,
                    const RunOptions& options, const TargetFactory& factory,
                    std::optional<RunState> resume = std::nullopt);

EvalCounts total_counts(const RunState& state);

/// Empirical per-component sample std dev (n - 1 divisor).
VecX empirical_std(const std::vector<VecX>& samples);
VecX empirical_mean(const std::vector<VecX>& samples);

struct Diagnostics {
  long n_samples = 0;
  long n_feasible = 0;
  double feasibility_rate = 0.0;
  std::optional<double> dv_mean_ms, dv_std_ms;
  std::optional<double> tau_s_mean_days, tau_s_std_days;
  EvalCounts counts;
  int dead_chains = 0;
};

/// Feasibility and Delta-v / tau_s statistics over post-burn-in samples.
/// Delta-v = c ln(m0 / m_f) in m/s.
Diagnostics summarize(const std::vector<SampleRow>& samples, const TransferProblem& problem,
                      const EvalCounts& counts, double feasibility_tol = kDefaultFeasibilityTol);

}  // namespace trajmc
