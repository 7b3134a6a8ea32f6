#include "trajmc/ddpm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

#include "trajmc/errors.hpp"
#include "trajmc/target.hpp"

namespace trajmc::ddpm {
namespace {

constexpr double kPi = 3.14159265358979323846;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatX silu(const MatX& x) {
  return x.unaryExpr([](double v) { return v * sigmoid(v); });
}

MatX silu_grad(const MatX& x) {
  return x.unaryExpr([](double v) {
    const double s = sigmoid(v);
    return s * (1.0 + v * (1.0 - s));
  });
}

void check_step(int n, const NoiseSchedule& s) {
  if (n < 1 || n > s.n_steps) throw DomainError("diffusion step outside [1, N]");
}

std::vector<double> to_vector(const VecX& v) { return {v.data(), v.data() + v.size()}; }

VecX from_vector(const std::vector<double>& v) {
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

NoiseSchedule cosine_schedule(int n_steps, double s) {
  if (n_steps < 2) throw DomainError("noise schedule needs at least two steps");
  NoiseSchedule sch;
  sch.n_steps = n_steps;
  sch.s = s;
  const auto N = static_cast<std::size_t>(n_steps);
  auto f = [n_steps, s](int n) {
    const double c = std::cos((static_cast<double>(n) / n_steps + s) / (1.0 + s) * kPi / 2.0);
    return c * c;
  };
  const double f0 = f(0);
  sch.beta.assign(N + 1, 0.0);
  sch.alpha.assign(N + 1, 1.0);
  sch.alpha_bar.assign(N + 1, 1.0);
  sch.beta_tilde.assign(N + 1, 0.0);
  for (int n = 1; n <= n_steps; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double raw = 1.0 - (f(n) / f0) / (f(n - 1) / f0);
    sch.beta[i] = std::clamp(raw, kBetaMin, kBetaMax);
    sch.alpha[i] = 1.0 - sch.beta[i];
    sch.alpha_bar[i] = sch.alpha_bar[i - 1] * sch.alpha[i];
    sch.beta_tilde[i] = (1.0 - sch.alpha_bar[i - 1]) / (1.0 - sch.alpha_bar[i]) * sch.beta[i];
  }
  return sch;
}

VecX forward_noise(const VecX& z0, int n, const NoiseSchedule& schedule, const VecX& noise) {
  check_step(n, schedule);
  const double ab = schedule.alpha_bar[static_cast<std::size_t>(n)];
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * noise;
}

VecX forward_step(const VecX& z_prev, int n, const NoiseSchedule& schedule, const VecX& noise) {
  check_step(n, schedule);
  const auto i = static_cast<std::size_t>(n);
  return std::sqrt(schedule.alpha[i]) * z_prev + std::sqrt(schedule.beta[i]) * noise;
}

VecX time_embedding(int n, int dim) {
  if (dim < 2 || dim % 2 != 0) throw DomainError("embedding dimension must be even");
  const int half = dim / 2;
  VecX e(dim);
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / half);
    e(k) = std::sin(n * freq);
    e(half + k) = std::cos(n * freq);
  }
  return e;
}

DenoiserModel::DenoiserModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.data_dim < 1 || cfg.hidden < 1 || cfg.hidden_layers < 1) {
    throw ConfigError("invalid network configuration");
  }
  std::mt19937_64 gen(seed);
  int in = cfg.data_dim + cfg.embed_dim;
  for (int l = 0; l <= cfg.hidden_layers; ++l) {
    const int out = l == cfg.hidden_layers ? cfg.data_dim : cfg.hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Layer layer{MatX(out, in), VecX(out)};
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = u(gen);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = u(gen);
    layers_.push_back(std::move(layer));
    in = out;
  }
  norm_mean = VecX::Zero(cfg.data_dim);
  norm_std = VecX::Ones(cfg.data_dim);
}

std::size_t DenoiserModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

MatX DenoiserModel::input(const MatX& z, const std::vector<int>& steps) const {
  if (z.rows() != cfg_.data_dim) throw ShapeMismatchError("input rows do not match the model");
  if (static_cast<Eigen::Index>(steps.size()) != z.cols()) {
    throw ShapeMismatchError("one step index per column is required");
  }
  MatX x(cfg_.data_dim + cfg_.embed_dim, z.cols());
  x.topRows(cfg_.data_dim) = z;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    x.col(j).tail(cfg_.embed_dim) = time_embedding(steps[static_cast<std::size_t>(j)],
                                                   cfg_.embed_dim);
  }
  return x;
}

MatX DenoiserModel::predict(const MatX& z, const std::vector<int>& steps) const {
  MatX a = input(z, steps);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    MatX pre = layers_[l].w * a;
    pre.colwise() += layers_[l].b;
    a = l + 1 == layers_.size() ? pre : silu(pre);
  }
  return a;
}

double DenoiserModel::loss(const MatX& z, const std::vector<int>& steps, const MatX& eps,
                           const VecX& weights, std::vector<Layer>* grads) const {
  const Eigen::Index batch = z.cols();
  if (eps.rows() != z.rows() || eps.cols() != batch || weights.size() != batch) {
    throw ShapeMismatchError("loss inputs disagree in shape");
  }
  std::vector<MatX> acts{input(z, steps)};
  std::vector<MatX> pres;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    MatX pre = layers_[l].w * acts.back();
    pre.colwise() += layers_[l].b;
    acts.push_back(l + 1 == layers_.size() ? pre : silu(pre));
    pres.push_back(std::move(pre));
  }
  const MatX resid = eps - acts.back();
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double value = inv_b * resid.colwise().squaredNorm().dot(weights.transpose());
  if (grads == nullptr) return value;

  grads->resize(layers_.size());
  MatX delta = -2.0 * inv_b * (resid * weights.asDiagonal());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    (*grads)[l].w = delta * acts[l].transpose();
    (*grads)[l].b = delta.rowwise().sum();
    if (l > 0) delta = (layers_[l].w.transpose() * delta).cwiseProduct(silu_grad(pres[l - 1]));
  }
  return value;
}

WeightedDataset make_dataset(const MatX& raw, VecX weights) {
  if (raw.cols() < 1) throw DomainError("dataset is empty");
  WeightedDataset ds;
  const double n = static_cast<double>(raw.cols());
  ds.mean = raw.rowwise().sum() / n;
  const MatX centered = raw.colwise() - ds.mean;
  ds.std = (centered.rowwise().squaredNorm() / n).cwiseSqrt();
  for (Eigen::Index i = 0; i < ds.std.size(); ++i) {
    if (!(ds.std(i) > 0.0)) ds.std(i) = 1.0;
  }
  ds.z = ds.std.cwiseInverse().asDiagonal() * centered;
  if (weights.size() == 0) weights = VecX::Ones(raw.cols());
  if (weights.size() != raw.cols()) throw ShapeMismatchError("one weight per row is required");
  ds.weights = std::move(weights);
  return ds;
}

TrainResult train(const DenoiserModel& init, const WeightedDataset& data,
                  const NoiseSchedule& schedule, const TrainHyper& hyper) {
  if (data.rows() < 1) throw TrainingError("training set is empty");
  if (data.z.rows() != init.data_dim()) {
    throw ShapeMismatchError("dataset dimension does not match the model");
  }
  if (hyper.batch < 1 || hyper.steps < 0) throw ConfigError("invalid training hyperparameters");

  TrainResult res;
  res.model = init;
  DenoiserModel& model = res.model;
  model.norm_mean = data.mean;
  model.norm_std = data.std;
  model.schedule_steps = schedule.n_steps;
  model.schedule_s = schedule.s;

  auto& layers = model.layers();
  std::vector<Layer> m1, m2;
  for (const auto& l : layers) {
    m1.push_back({MatX::Zero(l.w.rows(), l.w.cols()), VecX::Zero(l.b.size())});
    m2.push_back(m1.back());
  }

  std::mt19937_64 gen(hyper.seed);
  std::uniform_int_distribution<int> pick_row(0, data.rows() - 1);
  std::uniform_int_distribution<int> pick_step(1, schedule.n_steps);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = init.data_dim();
  const int b = hyper.batch;

  std::vector<Layer> grads;
  res.loss_curve.reserve(static_cast<std::size_t>(hyper.steps));
  for (int step = 0; step < hyper.steps; ++step) {
    std::vector<int> rows(static_cast<std::size_t>(b)), steps(static_cast<std::size_t>(b));
    for (auto& r : rows) r = pick_row(gen);
    for (auto& n : steps) n = pick_step(gen);
    MatX eps(d, b);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(gen);

    MatX zn(d, b);
    VecX w(b);
    for (int j = 0; j < b; ++j) {
      const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(j)]);
      zn.col(j) = forward_noise(data.z.col(r), steps[static_cast<std::size_t>(j)], schedule,
                                eps.col(j));
      w(j) = data.weights(r);
    }
    const double value = model.loss(zn, steps, eps, w, &grads);
    if (!std::isfinite(value)) {
      throw TrainingError("non-finite loss at step " + std::to_string(step));
    }
    res.loss_curve.push_back(value);

    const double lr = hyper.learning_rate;
    if (hyper.optimizer == Optimizer::Sgd) {
      for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].w -= lr * grads[l].w;
        layers[l].b -= lr * grads[l].b;
      }
      continue;
    }
    const double t = step + 1.0;
    const double c1 = 1.0 - std::pow(hyper.adam_beta1, t);
    const double c2 = 1.0 - std::pow(hyper.adam_beta2, t);
    auto adam = [&](auto& param, auto& g, auto& m, auto& v) {
      m = hyper.adam_beta1 * m + (1.0 - hyper.adam_beta1) * g;
      v = hyper.adam_beta2 * v + (1.0 - hyper.adam_beta2) * g.cwiseAbs2();
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + hyper.adam_eps);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      adam(layers[l].w, grads[l].w, m1[l].w, m2[l].w);
      adam(layers[l].b, grads[l].b, m1[l].b, m2[l].b);
    }
  }
  return res;
}

VecX reverse_step(const VecX& z_n, int n, const VecX& eps_pred, const NoiseSchedule& schedule,
                  const VecX& noise) {
  check_step(n, schedule);
  const auto i = static_cast<std::size_t>(n);
  const double coef = schedule.beta[i] / std::sqrt(1.0 - schedule.alpha_bar[i]);
  VecX z = (z_n - coef * eps_pred) / std::sqrt(schedule.alpha[i]);
  if (n > 1) z += std::sqrt(schedule.beta_tilde[i]) * noise;
  return z;
}

MatX sample(const DenoiserModel& model, const NoiseSchedule& schedule, int count,
            std::uint64_t seed) {
  if (count < 0) throw DomainError("sample count must be >= 0");
  const int d = model.data_dim();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatX z(d, count);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(gen);

  constexpr int kChunk = 2048;
  VecX noise(d);
  for (int n = schedule.n_steps; n >= 1; --n) {
    for (int start = 0; start < count; start += kChunk) {
      const int len = std::min(kChunk, count - start);
      const MatX eps = model.predict(z.middleCols(start, len),
                                     std::vector<int>(static_cast<std::size_t>(len), n));
      for (int j = 0; j < len; ++j) {
        if (n > 1) {
          for (int k = 0; k < d; ++k) noise(k) = normal(gen);
        }
        z.col(start + j) = reverse_step(z.col(start + j), n, eps.col(j), schedule, noise);
      }
    }
  }
  return (model.norm_std.asDiagonal() * z).colwise() + model.norm_mean;
}

WeightedDataset prepare_finetune_data(const MatX& lambdas, const std::vector<double>& j_star) {
  const auto n = static_cast<std::size_t>(lambdas.cols());
  if (n != j_star.size()) throw ShapeMismatchError("one objective value per sample is required");
  if (n < 10) throw DomainError("fine-tuning needs at least 10 samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&j_star](std::size_t a, std::size_t b) { return j_star[a] < j_star[b]; });
  const std::size_t keep = n - n / 10;
  order.resize(keep);
  std::sort(order.begin(), order.end());

  MatX raw(lambdas.rows(), static_cast<Eigen::Index>(keep));
  std::vector<double> js(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    raw.col(static_cast<Eigen::Index>(i)) = lambdas.col(static_cast<Eigen::Index>(order[i]));
    js[i] = j_star[order[i]];
  }
  const RewardCalibration cal = calibrate_reward(js);
  VecX w(static_cast<Eigen::Index>(keep));
  for (std::size_t i = 0; i < keep; ++i) {
    w(static_cast<Eigen::Index>(i)) = cal.degenerate ? 1.0 : reward(js[i], cal.a, cal.b);
  }
  WeightedDataset ds = make_dataset(raw, std::move(w));
  ds.j_star = std::move(js);
  return ds;
}

void save_model(const std::string& path, const DenoiserModel& model) {
  nlohmann::json j;
  const auto& cfg = model.config();
  j["format"] = "trajmc-ddpm";
  j["version"] = 1;
  j["config"] = {{"data_dim", cfg.data_dim},
                 {"embed_dim", cfg.embed_dim},
                 {"hidden", cfg.hidden},
                 {"hidden_layers", cfg.hidden_layers}};
  j["schedule"] = {{"n_steps", model.schedule_steps}, {"s", model.schedule_s}};
  j["norm_mean"] = to_vector(model.norm_mean);
  j["norm_std"] = to_vector(model.norm_std);
  j["layers"] = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = l.w;
    j["layers"].push_back({{"rows", l.w.rows()},
                           {"cols", l.w.cols()},
                           {"w", std::vector<double>(w.data(), w.data() + w.size())},
                           {"b", to_vector(l.b)}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path);
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing model file " + path);
}

DenoiserModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed model file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "trajmc-ddpm") throw IoError(path + " is not a model file");
  ModelConfig cfg;
  cfg.data_dim = j.at("config").at("data_dim");
  cfg.embed_dim = j.at("config").at("embed_dim");
  cfg.hidden = j.at("config").at("hidden");
  cfg.hidden_layers = j.at("config").at("hidden_layers");
  DenoiserModel model(cfg, 0);
  model.schedule_steps = j.at("schedule").at("n_steps");
  model.schedule_s = j.at("schedule").at("s");
  model.norm_mean = from_vector(j.at("norm_mean").get<std::vector<double>>());
  model.norm_std = from_vector(j.at("norm_std").get<std::vector<double>>());
  const auto& jl = j.at("layers");
  if (jl.size() != model.layers().size()) throw ShapeMismatchError("layer count mismatch");
  for (std::size_t l = 0; l < jl.size(); ++l) {
    auto& layer = model.layers()[l];
    const Eigen::Index rows = jl[l].at("rows");
    const Eigen::Index cols = jl[l].at("cols");
    const auto w = jl[l].at("w").get<std::vector<double>>();
    const auto b = jl[l].at("b").get<std::vector<double>>();
    if (rows != layer.w.rows() || cols != layer.w.cols() ||
        static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows) {
      throw ShapeMismatchError("layer shape mismatch in " + path);
    }
    layer.w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>(w.data(), rows, cols);
    layer.b = from_vector(b);
  }
  if (model.norm_mean.size() != cfg.data_dim || model.norm_std.size() != cfg.data_dim) {
    throw ShapeMismatchError("normalization constants do not match the model");
  }
  return model;
}

}  // namespace trajmc::ddpm
