#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajmc/types.hpp"

namespace trajmc::ddpm {

/// Variance schedule. Arrays are indexed 0..N; index 0 is the clean data
/// (beta = 0, alpha_bar = 1).
struct NoiseSchedule {
  int n_steps = 0;
  double s = 0.008;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> beta_tilde;
};

inline constexpr double kBetaMin = 1e-6;
inline constexpr double kBetaMax = 0.999;

/// Cosine schedule: alpha_bar from cos^2, betas clipped to
/// [kBetaMin, kBetaMax], alpha_bar rebuilt as the running product.
NoiseSchedule cosine_schedule(int n_steps, double s = 0.008);

/// z_n = sqrt(alpha_bar_n) z0 + sqrt(1 - alpha_bar_n) noise.
VecX forward_noise(const VecX& z0, int n, const NoiseSchedule& schedule, const VecX& noise);

/// One forward step q(z_n | z_{n-1}).
VecX forward_step(const VecX& z_prev, int n, const NoiseSchedule& schedule, const VecX& noise);

/// Sinusoidal embedding of the step index.
VecX time_embedding(int n, int dim);

struct Layer {
  MatX w;  // out x in
  VecX b;
};

struct ModelConfig {
  int data_dim = 4;
  int embed_dim = 32;
  int hidden = 128;
  int hidden_layers = 3;
};

/// Fully connected epsilon-predictor with SiLU activations plus the data
/// normalization it was trained with.
class DenoiserModel {
 public:
  DenoiserModel() = default;
  DenoiserModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  int data_dim() const { return cfg_.data_dim; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Predicted noise for normalized inputs; z is d x batch.
  MatX predict(const MatX& z, const std::vector<int>& steps) const;

  /// Loss (1/B) sum_i w_i |eps_i - eps_theta(z_i, n_i)|^2 and, if `grads`
  /// is non-null, its gradient w.r.t. every layer parameter.
  double loss(const MatX& z, const std::vector<int>& steps, const MatX& eps, const VecX& weights,
              std::vector<Layer>* grads) const;

  VecX norm_mean;
  VecX norm_std;
  int schedule_steps = 500;
  double schedule_s = 0.008;

  std::size_t parameter_count() const;

 private:
  MatX input(const MatX& z, const std::vector<int>& steps) const;

  ModelConfig cfg_;
  std::vector<Layer> layers_;
};

/// Normalized rows (as columns of `z`) with reward weights.
struct WeightedDataset {
  MatX z;  // d x rows, normalized
  VecX weights;
  VecX mean;
  VecX std;
  std::vector<double> j_star;  // objective of each row (may be empty)

  int rows() const { return static_cast<int>(z.cols()); }
};

/// Normalizes raw rows (d x rows) to zero mean / unit std; weights default 1.
WeightedDataset make_dataset(const MatX& raw, VecX weights = {});

enum class Optimizer { Adam, Sgd };

struct TrainHyper {
  int steps = 10000;
  int batch = 256;
  double learning_rate = 1e-4;
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int log_every = 0;
};

struct TrainResult {
  DenoiserModel model;
  std::vector<double> loss_curve;
};

/// Minimizes the reward-weighted denoising loss from `init`'s weights. The
/// dataset's normalization constants are stored into the returned model.
TrainResult train(const DenoiserModel& init, const WeightedDataset& data,
                  const NoiseSchedule& schedule, const TrainHyper& hyper);

/// Ancestral sampling; returns denormalized samples as columns (d x count).
MatX sample(const DenoiserModel& model, const NoiseSchedule& schedule, int count,
            std::uint64_t seed);

/// One reverse step z_n -> z_{n-1} given the predicted noise and the fresh
/// Gaussian draw (ignored for n = 1).
VecX reverse_step(const VecX& z_n, int n, const VecX& eps_pred, const NoiseSchedule& schedule,
                  const VecX& noise);

/// Drops the worst 10% by J*, calibrates rewards on the survivors, and
/// normalizes. `lambdas` is d x rows.
WeightedDataset prepare_finetune_data(const MatX& lambdas, const std::vector<double>& j_star);

void save_model(const std::string& path, const DenoiserModel& model);
DenoiserModel load_model(const std::string& path);

}  // namespace trajmc::ddpm
