#include "trajmc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "trajmc/checkpoint.hpp"
#include "trajmc/errors.hpp"

namespace trajmc {
namespace {

VecX draw_normal(KeyedRng& rng, Eigen::Index d) {
  VecX xi(d);
  for (Eigen::Index i = 0; i < d; ++i) xi(i) = rng.normal();
  return xi;
}

// Always consumes one uniform so every kernel uses the stream the same way.
bool metropolis(double log_ratio, KeyedRng& rng) {
  const double u = rng.uniform();
  return std::log(u) < log_ratio;
}

void record_outcome(ChainState& chain, const StepOutcome& out) {
  ++chain.stats.proposals;
  if (out.accepted) ++chain.stats.accepts;
  if (out.evaluation_failed) {
    ++chain.stats.failures;
    ++chain.stats.consecutive_failures;
  } else {
    chain.stats.consecutive_failures = 0;
  }
}

VecX current_unit_gradient(ChainState& chain) {
  if (!chain.has_grad || chain.cached_grad.degenerate) {
    ++chain.stats.degenerate_drifts;
    return VecX::Zero(chain.lambda.size());
  }
  return normalized_gradient(chain.cached_grad);
}

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&fn, t, threads, n] {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Rwm: return "rwm";
    case Algorithm::Mala: return "mala";
    case Algorithm::Hmc: return "hmc";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "rwm") return Algorithm::Rwm;
  if (name == "mala") return Algorithm::Mala;
  if (name == "hmc") return Algorithm::Hmc;
  throw ConfigError("unknown algorithm '" + name + "' (expected rwm, mala or hmc)");
}

void ProposalParams::validate(Algorithm algo) const {
  if (sigma.size() == 0 || !(sigma.array() > 0.0).all()) {
    throw ConfigError("proposal std devs must be positive");
  }
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (leapfrog < 1) throw ConfigError("leapfrog steps must be >= 1");
  if (algo == Algorithm::Hmc && !(epsilon > 0.0)) throw ConfigError("HMC needs epsilon > 0");
}

VecX normalized_gradient(const GradientResult& g) {
  if (g.degenerate) return VecX::Zero(g.grad_log.size());
  const double n = g.grad_log.norm();
  if (!(n > 0.0) || !std::isfinite(n)) return VecX::Zero(g.grad_log.size());
  return g.grad_log / n;
}

VecX mala_proposal(const VecX& lambda, const VecX& unit_grad, const ProposalParams& p,
                   const VecX& xi) {
  const VecX mean = lambda + (0.5 * p.epsilon) * p.sigma.cwiseProduct(unit_grad);
  return mean + p.sigma.cwiseProduct(xi);
}

VecX hmc_first_position(const VecX& lambda, const VecX& unit_grad, const ProposalParams& p,
                        const VecX& xi) {
  const double dt = p.epsilon;
  const VecX sqrt_m = p.epsilon * p.sigma.cwiseInverse();
  const VecX inv_m = p.sigma.cwiseAbs2() / (p.epsilon * p.epsilon);
  const VecX mom = sqrt_m.cwiseProduct(xi) + (0.5 * dt) * sqrt_m.cwiseProduct(unit_grad);
  return lambda + dt * inv_m.cwiseProduct(mom);
}

double log_q(const VecX& to, const VecX& from, const VecX& unit_grad_from,
             const ProposalParams& p) {
  const VecX mean = from + (0.5 * p.epsilon) * p.sigma.cwiseProduct(unit_grad_from);
  return -0.5 * (to - mean).cwiseQuotient(p.sigma).squaredNorm();
}

StepOutcome rwm_step(ChainState& chain, const Target& target, const ProposalParams& p,
                     KeyedRng& rng) {
  StepOutcome out;
  const VecX xi = draw_normal(rng, chain.lambda.size());
  out.proposal = chain.lambda + p.sigma.cwiseProduct(xi);
  Evaluation ev = target.evaluate(out.proposal);
  ++chain.stats.objective_evals;
  if (!ev.ok) {
    out.evaluation_failed = true;
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
    metropolis(out.log_accept_ratio, rng);
    record_outcome(chain, out);
    return out;
  }
  out.log_accept_ratio = ev.log_density - chain.cached.log_density;
  out.accepted = metropolis(out.log_accept_ratio, rng);
  if (out.accepted) {
    chain.lambda = out.proposal;
    chain.cached = std::move(ev);
    chain.has_grad = false;
  }
  record_outcome(chain, out);
  return out;
}

StepOutcome mala_step(ChainState& chain, const Target& target, const ProposalParams& p,
                      KeyedRng& rng) {
  StepOutcome out;
  const bool use_grad = p.epsilon > 0.0;
  const VecX g0 = use_grad ? current_unit_gradient(chain) : VecX::Zero(chain.lambda.size());
  const VecX xi = draw_normal(rng, chain.lambda.size());
  out.proposal = mala_proposal(chain.lambda, g0, p, xi);

  Evaluation ev = target.evaluate(out.proposal);
  ++chain.stats.objective_evals;
  if (!ev.ok) {
    out.evaluation_failed = true;
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
    metropolis(out.log_accept_ratio, rng);
    record_outcome(chain, out);
    return out;
  }
  GradientResult g;
  VecX g1 = VecX::Zero(chain.lambda.size());
  if (use_grad) {
    g = target.gradient(out.proposal, ev);
    ++chain.stats.gradient_evals;
    g1 = normalized_gradient(g);
  }
  if (use_grad && g.degenerate) {
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
  } else if (!use_grad) {
    // Symmetric proposal: the q terms cancel exactly.
    out.log_accept_ratio = ev.log_density - chain.cached.log_density;
  } else {
    out.log_accept_ratio = ev.log_density - chain.cached.log_density +
                           log_q(chain.lambda, out.proposal, g1, p) -
                           log_q(out.proposal, chain.lambda, g0, p);
  }
  out.accepted = metropolis(out.log_accept_ratio, rng);
  if (out.accepted) {
    chain.lambda = out.proposal;
    chain.cached = std::move(ev);
    chain.cached_grad = std::move(g);
    chain.has_grad = use_grad;
  }
  record_outcome(chain, out);
  return out;
}

StepOutcome hmc_step(ChainState& chain, const Target& target, const ProposalParams& p,
                     KeyedRng& rng) {
  StepOutcome out;
  const double dt = p.epsilon;
  const VecX sqrt_m = p.epsilon * p.sigma.cwiseInverse();
  const VecX inv_m = p.sigma.cwiseAbs2() / (p.epsilon * p.epsilon);
  auto kinetic = [&inv_m](const VecX& mom) { return 0.5 * mom.cwiseAbs2().dot(inv_m); };

  VecX g = current_unit_gradient(chain);
  const VecX xi = draw_normal(rng, chain.lambda.size());
  VecX mom = sqrt_m.cwiseProduct(xi);
  const double h0 = -chain.cached.log_density + kinetic(mom);

  VecX pos = chain.lambda;
  Evaluation ev;
  GradientResult gr;
  bool rejected = false;
  for (int l = 0; l < p.leapfrog; ++l) {
    mom += (0.5 * dt) * sqrt_m.cwiseProduct(g);
    pos += dt * inv_m.cwiseProduct(mom);
    ev = target.evaluate(pos);
    ++chain.stats.objective_evals;
    if (!ev.ok) {
      out.evaluation_failed = true;
      rejected = true;
      break;
    }
    gr = target.gradient(pos, ev);
    ++chain.stats.gradient_evals;
    if (gr.degenerate) {
      rejected = true;
      break;
    }
    g = normalized_gradient(gr);
    mom += (0.5 * dt) * sqrt_m.cwiseProduct(g);
  }
  out.proposal = pos;
  if (rejected) {
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
  } else {
    const double h1 = -ev.log_density + kinetic(mom);
    out.log_accept_ratio = h0 - h1;
  }
  out.accepted = metropolis(out.log_accept_ratio, rng);
  if (out.accepted) {
    chain.lambda = std::move(pos);
    chain.cached = std::move(ev);
    chain.cached_grad = std::move(gr);
    chain.has_grad = true;
  }
  record_outcome(chain, out);
  return out;
}

StepOutcome sampler_step(Algorithm algo, ChainState& chain, const Target& target,
                         const ProposalParams& p, KeyedRng& rng) {
  switch (algo) {
    case Algorithm::Rwm: return rwm_step(chain, target, p, rng);
    case Algorithm::Mala: return mala_step(chain, target, p, rng);
    case Algorithm::Hmc: return hmc_step(chain, target, p, rng);
  }
  throw ConfigError("unknown algorithm");
}

void refresh_cache(ChainState& chain, const Target& target, bool need_gradient) {
  chain.cached = target.evaluate(chain.lambda);
  ++chain.stats.refresh_objective_evals;
  chain.has_grad = false;
  chain.cached_grad = {};
  if (need_gradient && chain.cached.ok) {
    chain.cached_grad = target.gradient(chain.lambda, chain.cached);
    ++chain.stats.refresh_gradient_evals;
    chain.has_grad = true;
  }
}

DiagonalGaussianTarget::DiagonalGaussianTarget(VecX mean, VecX std)
    : mean_(std::move(mean)), std_(std::move(std)) {
  if (mean_.size() != std_.size()) throw ShapeMismatchError("mean and std sizes differ");
  if (!(std_.array() > 0.0).all()) throw DomainError("std devs must be positive");
}

Evaluation DiagonalGaussianTarget::evaluate(const VecX& lambda) const {
  Evaluation ev;
  ev.log_density = -0.5 * (lambda - mean_).cwiseQuotient(std_).squaredNorm();
  ev.ok = std::isfinite(ev.log_density);
  ev.screening.j_star = -ev.log_density;
  return ev;
}

GradientResult DiagonalGaussianTarget::gradient(const VecX& lambda, const Evaluation&) const {
  GradientResult g;
  g.grad_log = -(lambda - mean_).cwiseQuotient(std_.cwiseAbs2());
  g.grad_j = -g.grad_log;
  g.degenerate = !g.grad_log.allFinite();
  return g;
}

int StageSchedule::total_iterations() const {
  int n = 0;
  for (const auto& s : stages) n += s.iterations;
  return n;
}

void StageSchedule::validate() const {
  if (stages.empty()) throw ConfigError("schedule has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage& s = stages[i];
    if (s.iterations < 0) throw ConfigError("stage iterations must be >= 0");
    if (!(s.h >= 0.0 && s.h <= 1.0)) throw ConfigError("stage h outside [0, 1]");
    if (i > 0 && s.h < stages[i - 1].h) throw ConfigError("stage h must be non-decreasing");
    if (!(s.sigma_scale > 0.0)) throw ConfigError("sigma_scale must be positive");
    if (s.leapfrog < 1) throw ConfigError("leapfrog must be >= 1");
    if (!(s.beta > 0.0)) throw ConfigError("beta must be positive");
  }
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
}

VecX empirical_mean(const std::vector<VecX>& samples) {
  if (samples.empty()) throw DomainError("mean of an empty sample set");
  VecX m = VecX::Zero(samples.front().size());
  for (const auto& s : samples) m += s;
  return m / static_cast<double>(samples.size());
}

VecX empirical_std(const std::vector<VecX>& samples) {
  if (samples.size() < 2) throw DomainError("std dev needs at least two samples");
  const VecX m = empirical_mean(samples);
  VecX v = VecX::Zero(m.size());
  for (const auto& s : samples) v += (s - m).cwiseAbs2();
  return (v / static_cast<double>(samples.size() - 1)).cwiseSqrt();
}

RunState run_chains(const std::vector<VecX>& init_samples, const StageSchedule& schedule,
                    const RunOptions& options, const TargetFactory& factory,
                    std::optional<RunState> resume) {
  schedule.validate();
  if (options.n_chains < 1) throw ConfigError("n_chains must be positive");
  const bool uses_grad = options.algorithm != Algorithm::Rwm;

  RunState st;
  if (resume) {
    st = std::move(*resume);
    if (static_cast<int>(st.chains.size()) != options.n_chains) {
      throw ConfigError("checkpoint chain count does not match the run");
    }
  } else {
    if (static_cast<int>(init_samples.size()) < options.n_chains) {
      throw ConfigError("fewer initial samples than chains");
    }
    st.sigma_init = options.sigma_init.size() > 0 ? options.sigma_init
                                                  : empirical_std(init_samples);
    st.chains.resize(static_cast<std::size_t>(options.n_chains));
    for (int i = 0; i < options.n_chains; ++i) {
      st.chains[static_cast<std::size_t>(i)].id = i;
      st.chains[static_cast<std::size_t>(i)].lambda = init_samples[static_cast<std::size_t>(i)];
    }
  }

  std::shared_ptr<const Target> target;
  int target_stage = -1;
  while (st.stage < static_cast<int>(schedule.stages.size())) {
    const Stage& stage = schedule.stages[static_cast<std::size_t>(st.stage)];
    if (target_stage < 0 || !schedule.stages[static_cast<std::size_t>(target_stage)]
                                 .same_target(stage)) {
      target = factory(stage);
    }
    target_stage = st.stage;

    ProposalParams pp;
    pp.sigma = stage.sigma_scale * st.sigma_init;
    pp.epsilon = options.algorithm == Algorithm::Rwm ? 0.0 : stage.epsilon;
    pp.leapfrog = stage.leapfrog;
    pp.beta = stage.beta;
    pp.validate(options.algorithm);
    const bool need_grad = uses_grad && pp.epsilon > 0.0;

    if (!st.caches_valid) {
      parallel_for(options.n_chains, options.threads, [&](int i) {
        auto& c = st.chains[static_cast<std::size_t>(i)];
        if (!c.stats.dead) refresh_cache(c, *target, need_grad);
      });
      st.caches_valid = true;
    }

    while (st.iteration_in_stage < stage.iterations) {
      const int iter = st.global_iteration;
      std::vector<char> accepted(static_cast<std::size_t>(options.n_chains), 0);
      parallel_for(options.n_chains, options.threads, [&](int i) {
        auto& c = st.chains[static_cast<std::size_t>(i)];
        if (c.stats.dead) return;
        if (need_grad && !c.has_grad && c.cached.ok) {
          c.cached_grad = target->gradient(c.lambda, c.cached);
          ++c.stats.refresh_gradient_evals;
          c.has_grad = true;
        }
        KeyedRng rng(options.seed, static_cast<std::uint64_t>(c.id),
                     static_cast<std::uint64_t>(iter));
        const StepOutcome out = sampler_step(options.algorithm, c, *target, pp, rng);
        accepted[static_cast<std::size_t>(i)] = out.accepted ? 1 : 0;
        if (c.stats.consecutive_failures > options.max_consecutive_failures) c.stats.dead = true;
      });
      ++st.global_iteration;
      ++st.iteration_in_stage;

      std::vector<double> js, es, dms, taus;
      int alive = 0, acc = 0;
      for (std::size_t i = 0; i < st.chains.size(); ++i) {
        const auto& c = st.chains[i];
        if (c.stats.dead) continue;
        ++alive;
        acc += accepted[i];
        const auto& s = c.cached.screening;
        js.push_back(s.j_star);
        es.push_back(s.e);
        dms.push_back(s.delta_m / options.m0);
        taus.push_back(s.tau_s_opt);
        if (st.global_iteration > schedule.burn_in) {
          SampleRow row;
          row.chain = c.id;
          row.iteration = st.global_iteration;
          row.lambda = c.lambda;
          row.log_density = c.cached.log_density;
          row.j_star = s.j_star;
          row.e = s.e;
          row.delta_m = s.delta_m;
          row.tau_s = s.tau_s_opt;
          row.tau_f = s.tau_f_opt;
          row.feasible = c.cached.ok && is_feasible(s.e, options.feasibility_tol);
          st.samples.push_back(std::move(row));
        }
      }
      TraceRow tr;
      tr.iteration = st.global_iteration;
      tr.h = stage.h;
      tr.mean_j_star = mean_of(js);
      tr.mean_e = mean_of(es);
      tr.mean_dm_over_m0 = mean_of(dms);
      tr.mean_tau_s = mean_of(taus);
      tr.acceptance_rate = alive > 0 ? static_cast<double>(acc) / alive : 0.0;
      st.traces.push_back(tr);

      const bool halt = options.halt_after >= 0 && st.global_iteration >= options.halt_after;
      if (!options.checkpoint_path.empty() &&
          ((options.checkpoint_every > 0 && st.global_iteration % options.checkpoint_every == 0) ||
           halt)) {
        save_checkpoint(options.checkpoint_path, st);
      }
      if (halt) return st;
    }

    ++st.stage;
    st.iteration_in_stage = 0;
    if (st.stage < static_cast<int>(schedule.stages.size()) &&
        !stage.same_target(schedule.stages[static_cast<std::size_t>(st.stage)])) {
      st.caches_valid = false;
    }
  }
  st.completed = true;
  if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, st);
  return st;
}

EvalCounts total_counts(const RunState& state) {
  EvalCounts c;
  for (const auto& ch : state.chains) {
    c.objective += ch.stats.objective_evals;
    c.gradient += ch.stats.gradient_evals;
    c.refresh_objective += ch.stats.refresh_objective_evals;
    c.refresh_gradient += ch.stats.refresh_gradient_evals;
  }
  return c;
}

Diagnostics summarize(const std::vector<SampleRow>& samples, const TransferProblem& problem,
                      const EvalCounts& counts, double feasibility_tol) {
  Diagnostics d;
  d.counts = counts;
  d.n_samples = static_cast<long>(samples.size());
  std::vector<double> dv, ts;
  const double c_ms = problem.system.velocity_to_si(problem.sc.c);
  for (const auto& s : samples) {
    if (!std::isfinite(s.log_density) || !is_feasible(s.e, feasibility_tol)) continue;
    ++d.n_feasible;
    const double mf = problem.sc.m0 - s.delta_m;
    dv.push_back(c_ms * std::log(problem.sc.m0 / mf));
    ts.push_back(problem.system.time_to_si(s.tau_s) / 86400.0);
  }
  d.feasibility_rate = d.n_samples > 0 ? static_cast<double>(d.n_feasible) / d.n_samples : 0.0;
  auto stats = [](const std::vector<double>& v, std::optional<double>& mean,
                  std::optional<double>& sd) {
    if (v.empty()) return;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    mean = m;
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  stats(dv, d.dv_mean_ms, d.dv_std_ms);
  stats(ts, d.tau_s_mean_days, d.tau_s_std_days);
  return d;
}

}  // namespace trajmc
