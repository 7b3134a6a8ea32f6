#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <trajmc/dynamics.hpp>
#include <trajmc/target.hpp>

using namespace trajmc;

namespace {

/// Frozen-time objective evaluated from a raw propagation.
double frozen_j(const VecX& l, const ScreeningContext& ctx, double tau_s, std::size_t sample) {
  const auto& p = ctx.problem;
  const Vec14 y = integrate(make_augmented_state(p.x0, l), p.dynamics(), 0.0, tau_s,
                            p.sc.dry_mass()).back().y;
  const Vec6 target = ctx.index.samples()[sample].x;
  const double e = std::hypot(std::hypot(target(0) - y(0), target(1) - y(1)),
                              std::hypot(target(3) - y(3), target(4) - y(4)));
  return e + ctx.params.kappa1 * ((p.sc.m0 - y(6)) / p.sc.m0 + ctx.params.kappa2 * tau_s);
}

VecX near_seed(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 0.02);
  VecX l = fixture::europa_feasible_costate();
  for (int i = 0; i < 4; ++i) l(i) += n(g);
  return l;
}

}  // namespace

TEST_SUITE("target") {
  TEST_CASE("log density is -beta J*") {
    const auto ctx = fixture::context(fixture::europa());
    const VecX l = fixture::europa_feasible_costate();
    const TargetDensity t1(ctx, 1e4), t2(ctx, 2e4);
    const double j = evaluate_objective(l, *ctx).j_star;
    CHECK(t1.log_density(l) == -1e4 * j);
    CHECK(t2.log_density(l) == doctest::Approx(2 * t1.log_density(l)).epsilon(1e-15));
    const auto ev = t1.evaluate(l);
    CHECK(ev.ok);
    CHECK(ev.screening.j_star == j);
    CHECK(!ev.screening.record);
  }

  TEST_CASE("failed screening is minus infinity") {
    const auto ctx = fixture::context(fixture::europa());
    const TargetDensity t(ctx, 1e4);
    const auto ev = t.evaluate(VecX::Zero(3));
    CHECK(!ev.ok);
    CHECK(ev.log_density == -std::numeric_limits<double>::infinity());
  }

  TEST_CASE("gradient vs central differences of the frozen objective") {
    const auto ctx = fixture::context(fixture::europa(), 1.2, 1e-6);
    const TargetDensity t(ctx, 1e4);
    std::mt19937_64 g(41);
    for (int k = 0; k < 4; ++k) {
      const VecX l = near_seed(g);
      const auto ev = t.evaluate(l);
      REQUIRE(ev.ok);
      const auto gr = t.gradient(l, ev);
      REQUIRE(!gr.degenerate);
      CHECK((gr.grad_log + 1e4 * gr.grad_j).norm() <= 1e-12 * gr.grad_log.norm());
      for (int i = 0; i < 4; ++i) {
        const double h = 1e-7;
        VecX a = l, b = l;
        a(i) += h;
        b(i) -= h;
        const double fd = (frozen_j(a, *ctx, ev.screening.tau_s_opt, ev.screening.orbit_sample) -
                           frozen_j(b, *ctx, ev.screening.tau_s_opt, ev.screening.orbit_sample)) / (2 * h);
        CHECK(oracle::rel_err(gr.grad_j(i), fd) < 1e-5);
      }
    }
  }

  TEST_CASE("gradient terms") {
    const auto& p = fixture::europa();
    std::mt19937_64 g(43);
    const VecX l = near_seed(g);
    const auto c0 = fixture::context(p, 0.0, 1e-6);
    const auto c1 = fixture::context(p, 1.0, 1e-6);
    const auto c2 = fixture::context(p, 1.0, 1e-3);
    const TargetDensity t0(c0, 1.0);
    const auto r = evaluate_objective(l, *c0);
    const auto g0 = t0.grad_log_density(l, r);
    // kappa1 = 0 leaves only the feasibility term.
    const auto [rec, chain] = propagate_with_stm(make_augmented_state(p.x0, l), p.dynamics(), 0.0,
                                                 r.tau_s_opt, p.sc.dry_mass());
    const auto s = extract_sensitivities(assemble_chain(chain), true);
    const VecX feas = s.g1.transpose() * r.e_vec / r.e;
    CHECK((g0.grad_j - feas).norm() < 1e-12 * feas.norm());
    // Same frozen times: kappa2 does not enter, kappa1 only adds G2/m0.
    const auto g1 = TargetDensity(c1, 1.0).grad_log_density(l, r);
    const auto g2 = TargetDensity(c2, 1.0).grad_log_density(l, r);
    CHECK((g1.grad_j - g2.grad_j).norm() == 0.0);
    CHECK((g1.grad_j - feas - s.g2.transpose() / p.sc.m0).norm() < 1e-12 * g1.grad_j.norm());
    // Zero violation drops the feasibility term.
    CHECK(frozen_objective_gradient(s, r.e_vec, 0.0, 1.0, 1.0) == VecX(s.g2.transpose()));
  }

  TEST_CASE("gradient is independent of the horizon") {
    const auto& p = fixture::europa();
    const VecX l = fixture::europa_feasible_costate();
    ScreeningParams a, b;
    a.tau_s_max = 90.0;
    b.tau_s_max = 70.0;
    const auto ca = ScreeningContext::make(p, a);
    const auto cb = ScreeningContext::make(p, b);
    const auto r = evaluate_objective(l, *ca);
    REQUIRE(r.tau_s_opt < 70.0);
    const auto ga = TargetDensity(ca, 1.0).grad_log_density(l, r);
    const auto gb = TargetDensity(cb, 1.0).grad_log_density(l, r);
    CHECK(ga.grad_j == gb.grad_j);
  }

  TEST_CASE("reward") {
    CHECK(reward(3.0, 1.0, 0.0) == 1.0);
    CHECK(reward(1.0, 2.0, 0.5) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-15));
    CHECK(reward(1.0, 1.0, 1.0) > reward(1.1, 1.0, 1.0));
  }

  TEST_CASE("reward calibration") {
    auto c = calibrate_reward({0.0, std::log(10.0)});
    CHECK(c.b == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.a == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(reward(std::log(10.0), c.a, c.b) == doctest::Approx(0.1).epsilon(1e-15));

    std::mt19937_64 g(47);
    std::uniform_real_distribution<double> u(0.001, 0.05);
    std::vector<double> j(200);
    for (auto& v : j) v = u(g);
    c = calibrate_reward(j);
    double lo = 1e300, hi = -1e300;
    for (double v : j) {
      lo = std::min(lo, reward(v, c.a, c.b));
      hi = std::max(hi, reward(v, c.a, c.b));
    }
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(lo == doctest::Approx(0.1).epsilon(1e-13));

    std::vector<double> shifted = j;
    for (auto& v : shifted) v += 0.3;
    const auto cs = calibrate_reward(shifted);
    for (std::size_t i = 0; i < j.size(); ++i) {
      CHECK(reward(shifted[i], cs.a, cs.b) == doctest::Approx(reward(j[i], c.a, c.b)).epsilon(1e-12));
    }
    CHECK(calibrate_reward({0.2, 0.2}).degenerate);
  }
}
