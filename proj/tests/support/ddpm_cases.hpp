#pragma once

// Synthetic diffusion-model experiments shared by the unit and acceptance
// suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <trajmc/ddpm.hpp>

namespace ddpm_case {

using trajmc::MatX;
using trajmc::VecX;
namespace dd = trajmc::ddpm;

/// Largest deviation from the schedule identities alpha = 1 - beta,
/// alpha_bar = prod alpha, beta_tilde = (1 - abar_{n-1}) / (1 - abar_n) beta,
/// and the unclipped cosine ratio.
inline double schedule_identity_error(int n_steps) {
  const auto s = dd::cosine_schedule(n_steps);
  const double pi = std::acos(-1.0);
  auto f = [&](int n) {
    const double c = std::cos((static_cast<double>(n) / n_steps + s.s) / (1 + s.s) * pi / 2);
    return c * c;
  };
  double err = std::abs(s.alpha_bar[0] - 1.0) + std::abs(s.beta[0]);
  double prod = 1.0;
  for (int n = 1; n <= n_steps; ++n) {
    const auto i = static_cast<std::size_t>(n);
    prod *= 1.0 - s.beta[i];
    err = std::max(err, std::abs(s.alpha[i] + s.beta[i] - 1.0));
    err = std::max(err, std::abs(s.alpha_bar[i] - prod));
    err = std::max(err, std::abs(s.beta_tilde[i] -
                                 (1 - s.alpha_bar[i - 1]) / (1 - s.alpha_bar[i]) * s.beta[i]));
    const double raw = 1.0 - f(n) / f(n - 1);
    if (raw > dd::kBetaMin && raw < dd::kBetaMax) err = std::max(err, std::abs(s.beta[i] - raw));
    if (s.beta[i] < dd::kBetaMin || s.beta[i] > dd::kBetaMax) err = 1.0;
  }
  return err;
}

/// Worst relative error of backprop against central differences of the loss
/// on a small network, over parameters with gradient magnitude above 1e-6.
inline double backprop_fd_error(std::uint64_t seed = 3) {
  dd::ModelConfig cfg;
  cfg.data_dim = 3;
  cfg.embed_dim = 4;
  cfg.hidden = 6;
  cfg.hidden_layers = 2;
  dd::DenoiserModel model(cfg, seed);
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n;
  const int b = 5;
  MatX z(3, b), eps(3, b);
  VecX w(b);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z.data()[i] = n(g);
    eps.data()[i] = n(g);
  }
  for (int j = 0; j < b; ++j) w(j) = 0.2 + 0.2 * j;
  const std::vector<int> steps{1, 7, 20, 50, 99};
  std::vector<dd::Layer> grads;
  model.loss(z, steps, eps, w, &grads);

  double worst = 0.0;
  const double h = 1e-6;
  auto probe = [&](double& p, double analytic) {
    if (std::abs(analytic) < 1e-6) return;
    const double keep = p;
    p = keep + h;
    const double up = model.loss(z, steps, eps, w, nullptr);
    p = keep - h;
    const double dn = model.loss(z, steps, eps, w, nullptr);
    p = keep;
    const double fd = (up - dn) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
  };
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    auto& layer = model.layers()[l];
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) probe(layer.w.data()[i], grads[l].w.data()[i]);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) probe(layer.b(i), grads[l].b(i));
  }
  return worst;
}

struct TwoModeResult {
  VecX center_a, center_b;        // recovered cluster means
  double fraction_a_before = 0;  // share of samples near mode A
  double fraction_a_after = 0;   // after reward-weighted fine-tuning
  double ratio_shift() const {
    const double before = fraction_a_before / (1 - fraction_a_before);
    const double after = fraction_a_after / (1 - fraction_a_after);
    return after / before;
  }
};

inline const VecX& mode_a() {
  static const VecX v = (VecX(2) << -2.0, 1.0).finished();
  return v;
}
inline const VecX& mode_b() {
  static const VecX v = (VecX(2) << 2.0, -1.0).finished();
  return v;
}

/// Trains on an equal mixture of two tight Gaussians, then fine-tunes with
/// reward 1 on mode A and 0.1 on mode B.
inline TwoModeResult two_mode_experiment(std::uint64_t seed = 1) {
  const int rows = 1000;
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n(0.0, 0.15);
  MatX raw(2, rows);
  VecX reward(rows);
  for (int j = 0; j < rows; ++j) {
    const bool a = j % 2 == 0;
    const VecX& c = a ? mode_a() : mode_b();
    raw(0, j) = c(0) + n(g);
    raw(1, j) = c(1) + n(g);
    reward(j) = a ? 1.0 : 0.1;
  }
  dd::ModelConfig cfg;
  cfg.data_dim = 2;
  cfg.embed_dim = 16;
  cfg.hidden = 64;
  cfg.hidden_layers = 2;
  const auto schedule = dd::cosine_schedule(100);
  dd::TrainHyper hyper;
  hyper.steps = 4000;
  hyper.batch = 128;
  hyper.learning_rate = 2e-3;
  hyper.seed = seed;
  const auto base = dd::train(dd::DenoiserModel(cfg, seed), dd::make_dataset(raw), schedule, hyper);

  auto classify = [](const MatX& s, VecX* ca, VecX* cb) {
    VecX sa = VecX::Zero(2), sb = VecX::Zero(2);
    int na = 0, nb = 0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if ((s.col(j) - mode_a()).norm() < (s.col(j) - mode_b()).norm()) {
        sa += s.col(j);
        ++na;
      } else {
        sb += s.col(j);
        ++nb;
      }
    }
    if (ca != nullptr) *ca = sa / std::max(na, 1);
    if (cb != nullptr) *cb = sb / std::max(nb, 1);
    return static_cast<double>(na) / static_cast<double>(s.cols());
  };

  TwoModeResult r;
  r.fraction_a_before = classify(dd::sample(base.model, schedule, 2000, seed + 10), &r.center_a,
                                 &r.center_b);
  hyper.steps = 2000;
  hyper.learning_rate = 1e-3;
  hyper.seed = seed + 1;
  const auto tuned = dd::train(base.model, dd::make_dataset(raw, reward), schedule, hyper);
  r.fraction_a_after = classify(dd::sample(tuned.model, schedule, 2000, seed + 11), nullptr, nullptr);
  return r;
}

}  // namespace ddpm_case
