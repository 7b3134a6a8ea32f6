#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <trajmc/csv.hpp>
#include <trajmc/dynamics.hpp>
#include <trajmc/errors.hpp>
#include <trajmc/propagate.hpp>

using namespace trajmc;

namespace {

Vec14 titan_start(const VecX& lambda) { return make_augmented_state(fixture::titan(10).x0, lambda); }

}  // namespace

TEST_SUITE("propagate") {
  TEST_CASE("coast-only arc conserves the Jacobi constant") {
    const auto& p = fixture::titan(10);
    const Vec14 y0 = titan_start(VecX::Zero(4));
    const auto rec = integrate(y0, p.dynamics(), 0.0, 10.0, p.sc.dry_mass());
    CHECK(rec.switches.empty());
    const double c0 = oracle::jacobi(y0.head<6>(), p.system.mu);
    double drift = 0.0;
    for (const auto& n : rec.nodes) {
      drift = std::max(drift, std::abs(oracle::jacobi(n.y.head<6>(), p.system.mu) - c0));
      CHECK(!n.thrust_on);
    }
    CHECK(drift < 1e-10);
    CHECK(rec.back().t == 10.0);
  }

  TEST_CASE("coast arc agrees with a fixed-step RK4 oracle") {
    const auto& p = fixture::titan(10);
    const Vec14 y0 = titan_start(VecX::Zero(4));
    const auto rec = integrate(y0, p.dynamics(), 0.0, 2.0, p.sc.dry_mass());
    const Vec6 ref = oracle::rk4_natural(y0.head<6>(), p.system.mu, 2.0, 20000);
    CHECK((rec.back().y.head<6>() - ref).norm() < 1e-10);
  }

  TEST_CASE("zero thrust keeps the mass") {
    const auto& p = fixture::titan(10);
    DynamicsParams dp = p.dynamics();
    dp.t_max = 0.0;
    const auto rec = integrate(titan_start(fixture::titan_switching_costate()), dp, 0.0, 5.0,
                               p.sc.dry_mass());
    CHECK(rec.back().y(idx::m) == p.sc.m0);
  }

  TEST_CASE("multi-switch Titan propagation invariants") {
    const auto& p = fixture::titan(10);
    const double c = p.dynamics().c;
    const auto rec = integrate(titan_start(fixture::titan_switching_costate()), p.dynamics(), 0.0,
                               90.0, p.sc.dry_mass());
    CHECK(rec.switches.size() >= 10);
    for (std::size_t i = 1; i < rec.nodes.size(); ++i) {
      CHECK(rec.nodes[i].t > rec.nodes[i - 1].t);
      CHECK(rec.nodes[i].y(idx::m) <= rec.nodes[i - 1].y(idx::m));
    }
    for (const auto& sw : rec.switches) CHECK(std::abs(switching_function(sw.y_minus, c)) < 1e-13);
    // Away from the refined switch points, sign(S) agrees with the arc flag.
    int mismatches = 0;
    for (const auto& n : rec.nodes) {
      const double s = switching_function(n.y, c);
      if (std::abs(s) > 1e-12 && (s > 0) != n.thrust_on) ++mismatches;
    }
    CHECK(mismatches == 0);
    // Mass is constant on coast steps and drops on thrust steps.
    for (std::size_t i = 1; i < rec.nodes.size(); ++i) {
      const double dm = rec.nodes[i - 1].y(idx::m) - rec.nodes[i].y(idx::m);
      if (rec.nodes[i].thrust_on) {
        CHECK(dm > 0.0);
      } else {
        CHECK(dm == 0.0);
      }
    }
  }

  TEST_CASE("propagation is deterministic") {
    const auto& p = fixture::titan(10);
    const Vec14 y0 = titan_start(fixture::titan_switching_costate());
    const auto a = integrate(y0, p.dynamics(), 0.0, 30.0, p.sc.dry_mass());
    const auto b = integrate(y0, p.dynamics(), 0.0, 30.0, p.sc.dry_mass());
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      CHECK(a.nodes[i].t == b.nodes[i].t);
      CHECK(a.nodes[i].y == b.nodes[i].y);
    }
  }

  TEST_CASE("self-convergence under tighter tolerance") {
    const auto& p = fixture::titan(10);
    const Vec14 y0 = titan_start(fixture::titan_switching_costate());
    IntegratorSettings loose;
    loose.rtol = loose.atol = 1e-10;
    const auto a = integrate(y0, p.dynamics(), 0.0, 90.0, p.sc.dry_mass(), loose);
    const auto b = integrate(y0, p.dynamics(), 0.0, 90.0, p.sc.dry_mass());
    CHECK(a.switches.size() == b.switches.size());
    CHECK((a.back().y.head<7>() - b.back().y.head<7>()).norm() < 1e-8);
  }

  TEST_CASE("fuel exhaustion carries the partial record") {
    const auto& p = fixture::titan(10);
    DynamicsParams dp = p.dynamics();
    dp.t_max = 0.5;
    VecX l(4);
    l << 0.0, 0.0, 1.0, 0.0;
    try {
      integrate(titan_start(l), dp, 0.0, 90.0, p.sc.dry_mass());
      FAIL("expected fuel exhaustion");
    } catch (const PropagationError& e) {
      CHECK(e.cause() == PropagationError::Cause::FuelExhausted);
      CHECK(!e.partial().empty());
      CHECK(e.partial().back().y(idx::m) == doctest::Approx(p.sc.dry_mass()).epsilon(1e-9));
    }
  }

  TEST_CASE("refine_switch on a linear switching function") {
    // S = |lv| + lm m / c with lv = (1,0,0), m = c and lm moving linearly
    // from -2 to 0, so S = 1 + lm vanishes at the midpoint.
    Vec14 ya = Vec14::Zero(), yb = Vec14::Zero();
    ya(idx::lv) = yb(idx::lv) = 1.0;
    ya(idx::m) = yb(idx::m) = 2.0;
    ya(idx::lm) = -2.0;
    yb(idx::lm) = 0.0;
    DenseStep<Vec14> step;
    step.t0 = 1.0;
    step.h = 0.5;
    step.rcont = {ya, yb - ya, Vec14::Zero(), Vec14::Zero(), Vec14::Zero()};
    const double t = refine_switch(step, -1.0, 1.0, 2.0);
    CHECK(t == doctest::Approx(1.25).epsilon(1e-15));
    CHECK_THROWS_AS(refine_switch(step, 1.0, 2.0, 2.0), EventError);
  }

  TEST_CASE("trajectory CSV export") {
    const auto& p = fixture::titan(10);
    const auto rec = integrate(titan_start(fixture::titan_switching_costate()), p.dynamics(), 0.0,
                               1.0, p.sc.dry_mass());
    std::stringstream ss;
    write_trajectory_csv(ss, rec);
    const auto table = csv::parse(ss);
    REQUIRE(table.header.size() == 16);
    CHECK(table.header.front() == "t");
    CHECK(table.header[14] == "y14");
    CHECK(table.header.back() == "thrust_on");
    CHECK(table.rows.size() == rec.nodes.size());
  }
}
