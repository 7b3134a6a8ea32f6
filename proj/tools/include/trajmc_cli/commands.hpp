#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace trajmc::cli {

/// Column orders of the CSV artifacts (stable across versions).
inline constexpr const char* kSamplesColumns =
    "chain,iteration,lambda_1..lambda_d,j_star,e,delta_m,tau_s,tau_f,feasible";
inline constexpr const char* kTraceColumns =
    "iteration,h,mean_j_star,mean_e,mean_dm_over_m0,mean_tau_s,acceptance_rate";
inline constexpr const char* kScreenColumns =
    "lambda_1..lambda_d,j_star,e,delta_m,tau_s,tau_f,feasible";
inline constexpr const char* kOrbitColumns = "tau_f,x1,x2,x3,x4,x5,x6";

struct ScreenOptions {
  std::string problem;   // problem TOML
  std::string input;     // CSV with lambda_* columns
  std::string out_dir;
  std::string orbit_csv; // optional pre-computed target orbit
  bool export_trajectories = false;  // trajectory_<row>.csv per input row
  double kappa1 = 1.0;
  double kappa2 = 1e-6;
  std::optional<double> tau_s_max;
  int threads = 1;
};

struct SampleOptions {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> algorithm;
  std::optional<double> epsilon;
  bool resume = false;
  int halt_after = -1;
};

struct ModelOptions {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
};

struct SummarizeOptions {
  std::string problem;
  std::string samples;
  std::string out_dir;
  double feasibility_tol = 5e-5;
};

/// Each command returns the number of warnings (e.g. skipped rows) and
/// throws trajmc::Error subclasses on failure.
int cmd_correct_orbit(const std::string& problem, const std::string& out_dir);
int cmd_screen(const ScreenOptions& opt);
int cmd_sample(const SampleOptions& opt);
int cmd_train(const ModelOptions& opt);
int cmd_finetune(const ModelOptions& opt);
int cmd_generate(const ModelOptions& opt);
int cmd_summarize(const SummarizeOptions& opt);

}  // namespace trajmc::cli
