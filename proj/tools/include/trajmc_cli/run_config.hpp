#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <trajmc/problem.hpp>
#include <trajmc/samplers.hpp>

namespace trajmc::cli {

enum class InitKind { Gaussian, Dataset, Model };

struct InitConfig {
  InitKind kind = InitKind::Gaussian;
  std::string path;        // seed CSV (gaussian fit / dataset) or model JSON
  VecX mean;               // explicit gaussian parameters
  VecX std;
  bool full_covariance = true;
  int count = 0;           // initial samples to draw; 0 means n_chains
};

/// Sampling run read from a TOML file. Relative paths resolve against the
/// file's directory.
struct RunConfig {
  std::filesystem::path source;
  std::string problem;
  std::optional<std::string> homotopy_end;
  Algorithm algorithm = Algorithm::Mala;
  int n_chains = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  int checkpoint_every = 0;
  std::optional<int> n_orb;
  double feasibility_tol = kDefaultFeasibilityTol;
  VecX sigma_init;
  InitConfig init;
  StageSchedule schedule;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& source);

/// Diffusion-model training / fine-tuning / generation settings.
struct ModelRunConfig {
  std::filesystem::path source;
  std::string dataset;     // train: CSV with lambda_* (optional weight column)
  std::string base_model;  // finetune / generate
  std::string samples;     // finetune: CSV with lambda_* and j_star
  int embed_dim = 32;
  int hidden = 128;
  int hidden_layers = 3;
  int schedule_steps = 500;
  int steps = 10000;
  int batch = 256;
  double learning_rate = 1e-4;
  std::string optimizer = "adam";
  std::uint64_t seed = 0;
  int count = 1000;        // generate
};

ModelRunConfig load_model_config(const std::string& path);

}  // namespace trajmc::cli
