#include "trajmc/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "trajmc/errors.hpp"

namespace trajmc {
namespace {

using nlohmann::json;

// JSON has no inf/nan; those are stored as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double num(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw IoError("bad number in checkpoint: " + s);
}

json vec(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

VecX vec(const json& a) {
  VecX v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = num(a[i]);
  return v;
}

json to_json(const ScreeningResult& s) {
  return {{"j_star", num(s.j_star)},   {"tau_s_opt", num(s.tau_s_opt)},
          {"tau_f_opt", num(s.tau_f_opt)}, {"e", num(s.e)},
          {"e_vec", vec(s.e_vec)},     {"delta_m", num(s.delta_m)},
          {"node", s.node},            {"orbit_sample", s.orbit_sample},
          {"n_switches", s.n_switches}, {"truncated", s.truncated}};
}

ScreeningResult screening_from(const json& j) {
  ScreeningResult s;
  s.j_star = num(j.at("j_star"));
  s.tau_s_opt = num(j.at("tau_s_opt"));
  s.tau_f_opt = num(j.at("tau_f_opt"));
  s.e = num(j.at("e"));
  s.e_vec = vec(j.at("e_vec"));
  s.delta_m = num(j.at("delta_m"));
  s.node = j.at("node");
  s.orbit_sample = j.at("orbit_sample");
  s.n_switches = j.at("n_switches");
  s.truncated = j.at("truncated");
  return s;
}

json to_json(const ChainState& c) {
  const auto& st = c.stats;
  return {
      {"id", c.id},
      {"lambda", vec(c.lambda)},
      {"cached",
       {{"log_density", num(c.cached.log_density)},
        {"ok", c.cached.ok},
        {"screening", to_json(c.cached.screening)}}},
      {"cached_grad",
       {{"grad_j", vec(c.cached_grad.grad_j)},
        {"grad_log", vec(c.cached_grad.grad_log)},
        {"tau_s", num(c.cached_grad.tau_s)},
        {"tau_f", num(c.cached_grad.tau_f)},
        {"degenerate", c.cached_grad.degenerate}}},
      {"has_grad", c.has_grad},
      {"stats",
       {{"proposals", st.proposals},
        {"accepts", st.accepts},
        {"objective_evals", st.objective_evals},
        {"gradient_evals", st.gradient_evals},
        {"refresh_objective_evals", st.refresh_objective_evals},
        {"refresh_gradient_evals", st.refresh_gradient_evals},
        {"failures", st.failures},
        {"degenerate_drifts", st.degenerate_drifts},
        {"consecutive_failures", st.consecutive_failures},
        {"dead", st.dead}}},
  };
}

ChainState chain_from(const json& j) {
  ChainState c;
  c.id = j.at("id");
  c.lambda = vec(j.at("lambda"));
  const auto& ce = j.at("cached");
  c.cached.log_density = num(ce.at("log_density"));
  c.cached.ok = ce.at("ok");
  c.cached.screening = screening_from(ce.at("screening"));
  const auto& cg = j.at("cached_grad");
  c.cached_grad.grad_j = vec(cg.at("grad_j"));
  c.cached_grad.grad_log = vec(cg.at("grad_log"));
  c.cached_grad.tau_s = num(cg.at("tau_s"));
  c.cached_grad.tau_f = num(cg.at("tau_f"));
  c.cached_grad.degenerate = cg.at("degenerate");
  c.has_grad = j.at("has_grad");
  const auto& s = j.at("stats");
  c.stats.proposals = s.at("proposals");
  c.stats.accepts = s.at("accepts");
  c.stats.objective_evals = s.at("objective_evals");
  c.stats.gradient_evals = s.at("gradient_evals");
  c.stats.refresh_objective_evals = s.at("refresh_objective_evals");
  c.stats.refresh_gradient_evals = s.at("refresh_gradient_evals");
  c.stats.failures = s.at("failures");
  c.stats.degenerate_drifts = s.at("degenerate_drifts");
  c.stats.consecutive_failures = s.at("consecutive_failures");
  c.stats.dead = s.at("dead");
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const RunState& state) {
  json j;
  j["format"] = "trajmc-checkpoint";
  j["version"] = 1;
  j["stage"] = state.stage;
  j["iteration_in_stage"] = state.iteration_in_stage;
  j["global_iteration"] = state.global_iteration;
  j["caches_valid"] = state.caches_valid;
  j["completed"] = state.completed;
  j["sigma_init"] = vec(state.sigma_init);
  j["chains"] = json::array();
  for (const auto& c : state.chains) j["chains"].push_back(to_json(c));
  j["samples"] = json::array();
  for (const auto& s : state.samples) {
    j["samples"].push_back({{"chain", s.chain},
                            {"iteration", s.iteration},
                            {"lambda", vec(s.lambda)},
                            {"log_density", num(s.log_density)},
                            {"j_star", num(s.j_star)},
                            {"e", num(s.e)},
                            {"delta_m", num(s.delta_m)},
                            {"tau_s", num(s.tau_s)},
                            {"tau_f", num(s.tau_f)},
                            {"feasible", s.feasible}});
  }
  j["traces"] = json::array();
  for (const auto& t : state.traces) {
    j["traces"].push_back({{"iteration", t.iteration},
                           {"h", num(t.h)},
                           {"mean_j_star", num(t.mean_j_star)},
                           {"mean_e", num(t.mean_e)},
                           {"mean_dm_over_m0", num(t.mean_dm_over_m0)},
                           {"mean_tau_s", num(t.mean_tau_s)},
                           {"acceptance_rate", num(t.acceptance_rate)}});
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed writing checkpoint " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot move checkpoint into place at " + path);
  }
}

RunState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "trajmc-checkpoint") throw IoError(path + " is not a checkpoint");
  try {
    RunState st;
    st.stage = j.at("stage");
    st.iteration_in_stage = j.at("iteration_in_stage");
    st.global_iteration = j.at("global_iteration");
    st.caches_valid = j.at("caches_valid");
    st.completed = j.at("completed");
    st.sigma_init = vec(j.at("sigma_init"));
    for (const auto& c : j.at("chains")) st.chains.push_back(chain_from(c));
    for (const auto& s : j.at("samples")) {
      SampleRow r;
      r.chain = s.at("chain");
      r.iteration = s.at("iteration");
      r.lambda = vec(s.at("lambda"));
      r.log_density = num(s.at("log_density"));
      r.j_star = num(s.at("j_star"));
      r.e = num(s.at("e"));
      r.delta_m = num(s.at("delta_m"));
      r.tau_s = num(s.at("tau_s"));
      r.tau_f = num(s.at("tau_f"));
      r.feasible = s.at("feasible");
      st.samples.push_back(std::move(r));
    }
    for (const auto& t : j.at("traces")) {
      TraceRow r;
      r.iteration = t.at("iteration");
      r.h = num(t.at("h"));
      r.mean_j_star = num(t.at("mean_j_star"));
      r.mean_e = num(t.at("mean_e"));
      r.mean_dm_over_m0 = num(t.at("mean_dm_over_m0"));
      r.mean_tau_s = num(t.at("mean_tau_s"));
      r.acceptance_rate = num(t.at("acceptance_rate"));
      st.traces.push_back(r);
    }
    return st;
  } catch (const json::exception& e) {
    throw IoError("incomplete checkpoint " + path + ": " + e.what());
  }
}

}  // namespace trajmc
