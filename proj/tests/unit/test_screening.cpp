#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <trajmc/dynamics.hpp>
#include <trajmc/errors.hpp>
#include <trajmc/kdtree.hpp>
#include <trajmc/screening.hpp>

using namespace trajmc;

namespace {

VecX random_costate(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 0.5);
  VecX l(4);
  for (int i = 0; i < 4; ++i) l(i) = n(g);
  return l;
}

std::shared_ptr<const TrajectoryRecord> record_for(const VecX& l, const ScreeningContext& ctx) {
  const auto& p = ctx.problem;
  try {
    return std::make_shared<TrajectoryRecord>(integrate(make_augmented_state(p.x0, l), p.dynamics(),
                                                        0.0, ctx.params.tau_s_max, p.sc.dry_mass()));
  } catch (const PropagationError& e) {
    return std::make_shared<TrajectoryRecord>(e.partial());
  }
}

}  // namespace

TEST_SUITE("screening") {
  TEST_CASE("k-d tree single point") {
    KdTree t({1.0, 2.0, 3.0}, 3);
    const double q[3] = {-5.0, 0.0, 9.0};
    CHECK(t.nearest(q).index == 0);
  }

  TEST_CASE("k-d tree matches a linear scan") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int dim : {2, 4, 6}) {
      std::vector<double> pts(static_cast<std::size_t>(500 * dim));
      for (auto& v : pts) v = u(g);
      const KdTree tree(pts, dim);
      for (int k = 0; k < 1000; ++k) {
        std::vector<double> q(static_cast<std::size_t>(dim));
        for (auto& v : q) v = 1.2 * u(g);
        double best = 1e300;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < 500; ++i) {
          double d2 = 0;
          for (int c = 0; c < dim; ++c) {
            const double d = pts[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] - q[static_cast<std::size_t>(c)];
            d2 += d * d;
          }
          if (d2 < best) {
            best = d2;
            arg = i;
          }
        }
        const auto hit = tree.nearest(q);
        CHECK(hit.index == arg);
        CHECK(hit.dist2 == best);
      }
    }
  }

  TEST_CASE("k-d tree ties go to the lowest index") {
    const KdTree t({1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0}, 2);
    const double q[2] = {0.0, 0.0};
    CHECK(t.nearest(q).index == 0);
    const KdTree dup({3.0, 3.0, 0.5, 0.5, 0.5, 0.5}, 2);
    CHECK(dup.nearest(q).index == 1);
  }

  TEST_CASE("feasibility threshold") {
    CHECK(is_feasible(0.0));
    CHECK(is_feasible(4.9e-5));
    CHECK(!is_feasible(5e-5));
    CHECK(!is_feasible(5.1e-5));
    CHECK(kDefaultFeasibilityTol == 5e-5);
  }

  TEST_CASE("screening parameters are validated") {
    ScreeningParams sp;
    sp.kappa1 = -1.0;
    CHECK_THROWS_AS(sp.validate(), ConfigError);
    sp = {};
    sp.tau_s_max = 0.0;
    CHECK_THROWS_AS(sp.validate(), ConfigError);
  }

  TEST_CASE("k-d screening equals the brute-force double loop") {
    const auto ctx = fixture::context(fixture::europa(), 1.0, 1e-6);
    std::mt19937_64 g(23);
    for (int k = 0; k < 10; ++k) {
      const VecX l = random_costate(g);
      const auto rec = record_for(l, *ctx);
      const auto r = screen_record(rec, *ctx);
      const auto bf = oracle::brute_force_jstar(*rec, ctx->index.samples(), true, 1.0, 1e-6,
                                                ctx->problem.sc.m0, ctx->params.tau_s_max);
      CHECK(r.j_star == bf.j_star);
      CHECK(r.node == bf.node);
      CHECK(r.orbit_sample == bf.sample);
      CHECK(r.e == doctest::Approx(r.e_vec.norm()).epsilon(1e-15));
      CHECK(r.j_star == doctest::Approx(r.e + (r.delta_m / ctx->problem.sc.m0 + 1e-6 * r.tau_s_opt)).epsilon(1e-15));
      CHECK(r.tau_s_opt >= 0.0);
      CHECK(r.tau_s_opt <= ctx->params.tau_s_max);
      CHECK(r.tau_f_opt >= 0.0);
      CHECK(r.tau_f_opt < ctx->problem.target.period);
    }
  }

  TEST_CASE("kappa1 = 0 reduces J* to the closest approach") {
    const auto ctx = fixture::context(fixture::europa(), 0.0, 1e-6);
    std::mt19937_64 g(29);
    const VecX l = random_costate(g);
    const auto rec = record_for(l, *ctx);
    const auto r = screen_record(rec, *ctx);
    const auto bf = oracle::brute_force_jstar(*rec, ctx->index.samples(), true, 0.0, 0.0, 1.0, 1e300);
    CHECK(r.j_star == r.e);
    CHECK(r.j_star == bf.j_star);
  }

  TEST_CASE("a node on the orbit gives zero objective") {
    const auto ctx = fixture::context(fixture::europa(), 0.0, 1e-6);
    auto rec = std::make_shared<TrajectoryRecord>();
    TrajectoryNode a, b;
    a.t = 0.0;
    a.y = Vec14::Zero();
    a.y.head<6>() = Vec6(0.5, 0.5, 0, 0, 0, 0);
    a.y(idx::m) = 1.0;
    b = a;
    b.t = 1.0;
    b.y.head<6>() = ctx->index.samples()[37].x;
    rec->nodes = {a, b};
    rec->t_end = 1.0;
    const auto r = screen_record(rec, *ctx);
    CHECK(r.j_star == 0.0);
    CHECK(r.orbit_sample == 37);
    CHECK(r.tau_s_opt == 1.0);
  }

  TEST_CASE("a longer horizon never increases J*") {
    const auto& p = fixture::europa();
    std::mt19937_64 g(31);
    for (int k = 0; k < 3; ++k) {
      const VecX l = random_costate(g);
      double prev = 1e300;
      for (double tmax : {20.0, 45.0, 90.0}) {
        ScreeningParams sp;
        sp.tau_s_max = tmax;
        const auto ctx = ScreeningContext::make(p, sp);
        const double j = evaluate_objective(l, *ctx).j_star;
        CHECK(j <= prev);
        prev = j;
      }
    }
  }

  TEST_CASE("evaluate_objective rejects bad samples") {
    const auto ctx = fixture::context(fixture::europa());
    CHECK_THROWS_AS(evaluate_objective(VecX::Zero(3), *ctx), ShapeMismatchError);
    VecX l = VecX::Zero(4);
    l(0) = std::nan("");
    CHECK_THROWS_AS(evaluate_objective(l, *ctx), DomainError);
  }

  TEST_CASE("polished Europa seed is feasible") {
    const auto ctx = fixture::context(fixture::europa());
    const auto r = evaluate_objective(fixture::europa_feasible_costate(), *ctx);
    CHECK(is_feasible(r));
  }
}
