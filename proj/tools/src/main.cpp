#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include <trajmc/errors.hpp>

#include "trajmc_cli/commands.hpp"

namespace {

using namespace trajmc::cli;

constexpr int kExitError = 1;
constexpr int kExitMissingInput = 2;

std::string columns_help() {
  return std::string("CSV columns:\n  samples.csv   ") + kSamplesColumns + "\n  traces.csv    " +
         kTraceColumns + "\n  screened.csv  " + kScreenColumns + "\n  orbit.csv     " +
         kOrbitColumns + "\n\nLog level: TRAJMC_LOG=trace|debug|info|warn|error|off";
}

void configure_logging() {
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  if (const char* lvl = std::getenv("TRAJMC_LOG")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

/// Paths that must exist before a command starts.
bool require_file(const std::string& path, const char* what) {
  if (std::filesystem::is_regular_file(path)) return true;
  std::cerr << "error: " << what << " not found: " << path << '\n';
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Gradient-informed MCMC search for low-thrust CR3BP transfers"};
  app.footer(columns_help());
  app.require_subcommand(1);

  std::string config, out = ".", input, orbit_csv, samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, count;
  std::optional<std::string> algorithm;
  std::optional<double> epsilon, tau_s_max;
  bool resume = false, export_traj = false;
  int halt_after = -1;
  double kappa1 = 1.0, kappa2 = 1e-6, feas_tol = 5e-5;

  auto add_common = [&](CLI::App* sub, const char* config_help) {
    sub->add_option("-c,--config", config, config_help)->required();
    sub->add_option("-o,--out", out, "Output directory");
  };

  auto* correct = app.add_subcommand("correct-orbit", "Correct the target DRO and write orbit.csv");
  add_common(correct, "Problem TOML");

  auto* screen = app.add_subcommand("screen", "Evaluate J* for rows of a costate CSV");
  add_common(screen, "Problem TOML");
  screen->add_option("-i,--input", input, "CSV with lambda_1..lambda_d columns")->required();
  screen->add_option("--orbit", orbit_csv, "Pre-computed target orbit CSV");
  screen->add_option("--kappa1", kappa1, "Fuel weight");
  screen->add_option("--kappa2", kappa2, "Time weight [1/TU]");
  screen->add_option("--tau-s-max", tau_s_max, "Propagation horizon [TU]");
  screen->add_option("--threads", threads, "Worker threads");
  screen->add_flag("--export-trajectories", export_traj, "Write trajectory_<row>.csv per row");

  auto* sample = app.add_subcommand("sample", "Run the MCMC schedule");
  add_common(sample, "Run TOML");
  sample->add_option("--seed", seed, "Override the config seed");
  sample->add_option("--threads", threads, "Worker threads");
  sample->add_option("--algo", algorithm, "rwm, mala or hmc");
  sample->add_option("--epsilon", epsilon, "Override epsilon in every stage");
  sample->add_flag("--resume", resume, "Continue from <out>/checkpoint.json");
  sample->add_option("--halt-after", halt_after, "Stop after this global iteration");

  auto* train = app.add_subcommand("train", "Train a diffusion model on a costate dataset");
  add_common(train, "Model TOML");
  train->add_option("--seed", seed, "Override the config seed");

  auto* finetune = app.add_subcommand("finetune", "Reward-weighted fine-tuning from samples");
  add_common(finetune, "Model TOML");
  finetune->add_option("--seed", seed, "Override the config seed");

  auto* generate = app.add_subcommand("generate", "Draw costates from a trained model");
  add_common(generate, "Model TOML");
  generate->add_option("--seed", seed, "Override the config seed");
  generate->add_option("-n,--count", count, "Number of samples");

  auto* summarize = app.add_subcommand("summarize", "Feasibility and delta-v statistics");
  add_common(summarize, "Problem TOML");
  summarize->add_option("-s,--samples", samples, "samples.csv from a sample run")->required();
  summarize->add_option("--feasibility-tol", feas_tol, "Feasibility threshold on e");

  CLI11_PARSE(app, argc, argv);

  if (!require_file(config, "config file")) return kExitMissingInput;
  try {
    int warnings = 0;
    if (*correct) {
      warnings = cmd_correct_orbit(config, out);
    } else if (*screen) {
      if (!require_file(input, "input CSV")) return kExitMissingInput;
      ScreenOptions o;
      o.problem = config;
      o.input = input;
      o.out_dir = out;
      o.orbit_csv = orbit_csv;
      o.export_trajectories = export_traj;
      o.kappa1 = kappa1;
      o.kappa2 = kappa2;
      o.tau_s_max = tau_s_max;
      o.threads = threads.value_or(1);
      warnings = cmd_screen(o);
    } else if (*sample) {
      SampleOptions o;
      o.config = config;
      o.out_dir = out;
      o.seed = seed;
      o.threads = threads;
      o.algorithm = algorithm;
      o.epsilon = epsilon;
      o.resume = resume;
      o.halt_after = halt_after;
      warnings = cmd_sample(o);
    } else if (*train || *finetune || *generate) {
      ModelOptions o{config, out, seed, count};
      warnings = *train ? cmd_train(o) : *finetune ? cmd_finetune(o) : cmd_generate(o);
    } else if (*summarize) {
      if (!require_file(samples, "samples CSV")) return kExitMissingInput;
      warnings = cmd_summarize({config, samples, out, feas_tol});
    }
    if (warnings > 0) spdlog::warn("{} warning(s); see metadata.json", warnings);
    return 0;
  } catch (const trajmc::Error& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
    return kExitError;
  }
}
