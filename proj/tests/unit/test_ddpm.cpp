#include <cmath>
#include <filesystem>
#include <random>

#include "ddpm_cases.hpp"
#include "doctest.h"
#include "oracles.hpp"

#include <trajmc/ddpm.hpp>
#include <trajmc/errors.hpp>
#include <trajmc/target.hpp>

using namespace trajmc;
namespace dd = trajmc::ddpm;

TEST_SUITE("ddpm") {
  TEST_CASE("schedule identities") {
    for (int n : {10, 100, 1000}) {
      CAPTURE(n);
      CHECK(ddpm_case::schedule_identity_error(n) < 1e-12);
      const auto s = dd::cosine_schedule(n);
      for (int k = 1; k <= n; ++k) CHECK(s.alpha_bar[static_cast<std::size_t>(k)] < s.alpha_bar[static_cast<std::size_t>(k - 1)]);
    }
    CHECK_THROWS_AS(dd::cosine_schedule(1), DomainError);
  }

  TEST_CASE("forward noise marginal") {
    const auto s = dd::cosine_schedule(100);
    std::mt19937_64 g(2);
    std::normal_distribution<double> n;
    VecX z0(1);
    z0(0) = 1.5;
    for (int step : {10, 50, 90}) {
      std::vector<double> x;
      for (int k = 0; k < 40000; ++k) {
        VecX e(1);
        e(0) = n(g);
        x.push_back(dd::forward_noise(z0, step, s, e)(0));
      }
      const double ab = s.alpha_bar[static_cast<std::size_t>(step)];
      CHECK(std::abs(oracle::mean(x) - std::sqrt(ab) * 1.5) < 4 * std::sqrt((1 - ab) / 40000));
      CHECK(oracle::stddev(x) == doctest::Approx(std::sqrt(1 - ab)).epsilon(0.02));
    }
  }

  TEST_CASE("chained forward steps match the closed form in distribution") {
    const auto s = dd::cosine_schedule(20);
    std::mt19937_64 g(4);
    std::normal_distribution<double> n;
    std::vector<double> x;
    for (int k = 0; k < 20000; ++k) {
      VecX z(1);
      z(0) = 1.0;
      for (int step = 1; step <= 12; ++step) {
        VecX e(1);
        e(0) = n(g);
        z = dd::forward_step(z, step, s, e);
      }
      x.push_back(z(0));
    }
    const double ab = s.alpha_bar[12];
    CHECK(oracle::mean(x) == doctest::Approx(std::sqrt(ab)).epsilon(0.03));
    CHECK(oracle::stddev(x) == doctest::Approx(std::sqrt(1 - ab)).epsilon(0.03));
  }

  TEST_CASE("backprop matches finite differences") {
    CHECK(ddpm_case::backprop_fd_error() < 1e-4);
  }

  TEST_CASE("unit weights give the plain mean loss") {
    dd::ModelConfig cfg;
    cfg.data_dim = 2;
    cfg.embed_dim = 4;
    cfg.hidden = 8;
    cfg.hidden_layers = 1;
    const dd::DenoiserModel m(cfg, 1);
    MatX z = MatX::Random(2, 6), eps = MatX::Random(2, 6);
    const std::vector<int> steps{1, 2, 3, 4, 5, 6};
    const MatX pred = m.predict(z, steps);
    const double plain = (eps - pred).colwise().squaredNorm().sum() / 6.0;
    CHECK(m.loss(z, steps, eps, VecX::Ones(6), nullptr) == doctest::Approx(plain).epsilon(1e-14));
    CHECK(m.loss(z, steps, eps, VecX::Constant(6, 3.0), nullptr) ==
          doctest::Approx(3 * plain).epsilon(1e-14));
  }

  TEST_CASE("constant weights rescale the SGD learning rate") {
    dd::ModelConfig cfg;
    cfg.data_dim = 2;
    cfg.embed_dim = 4;
    cfg.hidden = 8;
    cfg.hidden_layers = 1;
    const dd::DenoiserModel init(cfg, 5);
    const MatX raw = MatX::Random(2, 30);
    const auto sch = dd::cosine_schedule(20);
    dd::TrainHyper h;
    h.steps = 30;
    h.batch = 8;
    h.optimizer = dd::Optimizer::Sgd;
    h.learning_rate = 0.01;
    h.seed = 9;
    const auto a = dd::train(init, dd::make_dataset(raw, VecX::Constant(30, 0.5)), sch, h);
    h.learning_rate = 0.005;
    const auto b = dd::train(init, dd::make_dataset(raw), sch, h);
    for (std::size_t l = 0; l < a.model.layers().size(); ++l) {
      CHECK((a.model.layers()[l].w - b.model.layers()[l].w).cwiseAbs().maxCoeff() < 1e-13);
      CHECK((a.model.layers()[l].b - b.model.layers()[l].b).cwiseAbs().maxCoeff() < 1e-13);
    }
  }

  TEST_CASE("dataset normalization") {
    MatX raw(2, 4);
    raw << 1, 2, 3, 4, 5, 5, 5, 5;
    const auto ds = dd::make_dataset(raw);
    CHECK(ds.mean(0) == 2.5);
    CHECK(ds.std(1) == 1.0);
    CHECK(ds.z.row(0).mean() == doctest::Approx(0.0));
    CHECK(std::sqrt(ds.z.row(0).squaredNorm() / 4) == doctest::Approx(1.0));
    CHECK_THROWS_AS(dd::make_dataset(raw, VecX::Ones(3)), ShapeMismatchError);
  }

  TEST_CASE("fine-tuning data preparation") {
    MatX l(4, 10);
    std::vector<double> j(10);
    for (int i = 0; i < 10; ++i) {
      l.col(i).setConstant(i);
      j[static_cast<std::size_t>(i)] = 0.01 * (i + 1);
    }
    j[3] = 1.0;  // worst row
    const auto ds = dd::prepare_finetune_data(l, j);
    CHECK(ds.rows() == 9);
    CHECK(ds.weights.maxCoeff() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(ds.weights.minCoeff() == doctest::Approx(0.1).epsilon(1e-13));
    for (double v : ds.j_star) CHECK(v != 1.0);
    for (int r = 0; r < 4; ++r) CHECK(std::abs(ds.z.row(r).mean()) < 1e-12);
    CHECK_THROWS_AS(dd::prepare_finetune_data(l.leftCols(9), std::vector<double>(9, 0.1)), DomainError);
  }

  TEST_CASE("single reverse step is deterministic") {
    const auto s = dd::cosine_schedule(10);
    VecX z(2), e(2), a(2), b(2);
    z << 0.3, -0.2;
    e << 0.1, 0.05;
    a << 5, 5;
    b << -7, 1;
    CHECK(dd::reverse_step(z, 1, e, s, a) == dd::reverse_step(z, 1, e, s, b));
    const VecX expect = (z - s.beta[1] / std::sqrt(1 - s.alpha_bar[1]) * e) / std::sqrt(s.alpha[1]);
    CHECK((dd::reverse_step(z, 1, e, s, a) - expect).norm() < 1e-15);
  }

  TEST_CASE("sampling is seeded and the model file round-trips") {
    dd::ModelConfig cfg;
    cfg.data_dim = 3;
    cfg.embed_dim = 4;
    cfg.hidden = 8;
    cfg.hidden_layers = 2;
    dd::DenoiserModel m(cfg, 12);
    m.norm_mean = VecX::LinSpaced(3, -1, 1);
    m.norm_std = VecX::Constant(3, 0.5);
    const auto s = dd::cosine_schedule(15);
    CHECK(dd::sample(m, s, 7, 3) == dd::sample(m, s, 7, 3));
    CHECK(dd::sample(m, s, 7, 3) != dd::sample(m, s, 7, 4));
    CHECK(dd::sample(m, s, 0, 3).cols() == 0);
    const auto path = (std::filesystem::temp_directory_path() / "trajmc_unit_model.json").string();
    dd::save_model(path, m);
    const auto back = dd::load_model(path);
    CHECK(dd::sample(back, s, 7, 3) == dd::sample(m, s, 7, 3));
    CHECK(back.parameter_count() == m.parameter_count());
    std::filesystem::remove(path);
  }

  TEST_CASE("two-mode recovery and reward-weighted fine-tuning") {
    const auto r = ddpm_case::two_mode_experiment();
    CHECK((r.center_a - ddpm_case::mode_a()).norm() < 0.1);
    CHECK((r.center_b - ddpm_case::mode_b()).norm() < 0.1);
    CHECK(r.fraction_a_before > 0.3);
    CHECK(r.fraction_a_before < 0.7);
    CHECK(r.ratio_shift() >= 1.5);
  }
}
