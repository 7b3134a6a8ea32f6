#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include <trajmc/problem.hpp>
#include <trajmc/problem_config.hpp>
#include <trajmc/screening.hpp>

#include "oracles.hpp"

namespace fixture {

/// Corrected problem from a bundled definition, built once per process.
inline const trajmc::TransferProblem& problem(const std::string& file, int n_orb = 2000) {
  static std::map<std::pair<std::string, int>, trajmc::TransferProblem> cache;
  const auto key = std::make_pair(file, n_orb);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto def = trajmc::load_problem_definition(oracle::data_path(file));
    def.n_orb = n_orb;
    it = cache.emplace(key, trajmc::build_problem(def)).first;
  }
  return it->second;
}

inline const trajmc::TransferProblem& europa(int n_orb = 2000) { return problem("europa.toml", n_orb); }
inline const trajmc::TransferProblem& titan(int n_orb = 2000) { return problem("titan.toml", n_orb); }

inline std::shared_ptr<const trajmc::ScreeningContext> context(const trajmc::TransferProblem& p,
                                                               double kappa1 = 1.0,
                                                               double kappa2 = 1e-6) {
  trajmc::ScreeningParams sp;
  sp.kappa1 = kappa1;
  sp.kappa2 = kappa2;
  sp.tau_s_max = p.tau_s_max;
  sp.n_orb = static_cast<int>(p.target.samples.size());
  return trajmc::ScreeningContext::make(p, sp);
}

/// Titan costates whose thrust/coast structure switches 8 times in 20 TU.
inline trajmc::VecX titan_switching_costate() {
  trajmc::VecX l(4);
  l << 0.009427, 0.003031, -0.036141, 0.190032;
  return l;
}

/// Polished Europa costate with e < 5e-5.
inline trajmc::VecX europa_feasible_costate() {
  trajmc::VecX l(4);
  l << -0.423077, 0.019101, -0.157430, -0.283006;
  return l;
}

}  // namespace fixture
