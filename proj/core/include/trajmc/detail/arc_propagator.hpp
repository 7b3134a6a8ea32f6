#pragma once

// Shared driver for state-only and state+STM propagation with thrust/coast
// switch detection. Internal header.

#include <cmath>
#include <limits>
#include <utility>

#include "trajmc/dynamics.hpp"
#include "trajmc/propagate.hpp"
#include "trajmc/rk54.hpp"

namespace trajmc::detail {

inline constexpr double kMinArcLength = 1e-9;  // TU

template <class Block>
DenseStep<Vec14> state_column(const DenseStep<Block>& step) {
  DenseStep<Vec14> out;
  out.t0 = step.t0;
  out.h = step.h;
  for (std::size_t i = 0; i < step.rcont.size(); ++i) out.rcont[i] = step.rcont[i].col(0);
  return out;
}

/// Propagates `block0` (column 0 = state) over [t0, t_end].
/// `rhs(flag, block)` returns the block derivative for the given arc flag.
/// `on_switch(event, block_at_switch)` returns the block integration restarts
/// from after the switch.
template <class Block, class Rhs, class OnSwitch>
TrajectoryRecord propagate_arcs(const Block& block0, const DynamicsParams& params, double t0,
                                double t_end, double dry_mass, const IntegratorSettings& settings,
                                Rhs&& rhs, OnSwitch&& on_switch, Block* final_block = nullptr) {
  using Cause = PropagationError::Cause;
  TrajectoryRecord rec;
  rec.t0 = t0;
  rec.t_end = t0;

  const Vec14 y0 = block0.col(0);
  bool thrust = initial_thrust_flag(y0, params.c);
  rec.nodes.push_back({t0, y0, thrust});

  auto f = [&thrust, &rhs](double, const Block& b) -> Block { return rhs(thrust, b); };
  Dopri54<Block, decltype(f)> stepper(f, settings);

  auto fail = [&rec](Cause cause, const std::string& what) {
    throw PropagationError(cause, what, std::move(rec));
  };

  double last_switch = -std::numeric_limits<double>::infinity();
  try {
    stepper.reset(t0, block0);
    while (stepper.t() < t_end) {
      const auto& dense = stepper.step(t_end);
      const Vec14 y_new = stepper.y().col(0);
      if (!y_new.allFinite()) {
        rec.t_end = rec.nodes.back().t;
        fail(Cause::NonFinite, "non-finite state during propagation");
      }

      if (thrust && y_new(idx::m) < dry_mass) {
        const auto d = state_column(dense);
        const double ma = d.rcont[0](idx::m) - dry_mass;
        const double mb = y_new(idx::m) - dry_mass;
        const double t_ex = refine_root(
            [&d, dry_mass](double t) { return d.col0_at(t)(idx::m) - dry_mass; }, d.t0, d.t1(),
            ma, mb, 1e-15, settings.max_refine_iterations);
        rec.nodes.push_back({t_ex, d.col0_at(t_ex), thrust});
        rec.t_end = t_ex;
        fail(Cause::FuelExhausted, "fuel exhausted at t=" + std::to_string(t_ex));
      }

      const double s_new = switching_function(y_new, params.c);
      const bool wrong_side = thrust ? s_new < 0.0 : s_new > 0.0;
      if (!wrong_side) {
        rec.nodes.push_back({stepper.t(), y_new, thrust});
        continue;
      }

      const auto d = state_column(dense);
      double s_a = switching_function(Vec14(d.rcont[0]), params.c);
      // A step starting at the previous switch may begin a hair on the
      // wrong side; the arc flag defines the side there.
      if (thrust ? s_a <= 0.0 : s_a >= 0.0) {
        s_a = thrust ? settings.switch_tol : -settings.switch_tol;
      }
      // Bracket on the interpolant, then polish on re-integrated states so
      // the restart state satisfies the event tolerance itself.
      double t_sw = refine_switch(d, s_a, s_new, params.c, settings);
      auto s_true = [&stepper, &params](double t) {
        return switching_function(Vec14(stepper.restep_to(t).col(0)), params.c);
      };
      const double s_sw = s_true(t_sw);
      if (std::abs(s_sw) >= settings.switch_tol) {
        const bool before = thrust ? s_sw > 0.0 : s_sw < 0.0;
        t_sw = before ? refine_root(s_true, t_sw, d.t1(), s_sw, s_new, settings.switch_tol,
                                    settings.max_refine_iterations)
                      : refine_root(s_true, d.t0, t_sw, s_a, s_sw, settings.switch_tol,
                                    settings.max_refine_iterations);
      }
      if (t_sw - last_switch < kMinArcLength) {
        rec.t_end = rec.nodes.back().t;
        fail(Cause::Event, "chattering switch near t=" + std::to_string(t_sw));
      }
      const Block b_sw = stepper.restep_to(t_sw);
      SwitchEvent ev;
      ev.t_switch = t_sw;
      ev.y_minus = b_sw.col(0);
      ev.direction = thrust ? SwitchDirection::ThrustToCoast : SwitchDirection::CoastToThrust;
      if (t_sw > rec.nodes.back().t) {
        rec.nodes.push_back({t_sw, ev.y_minus, thrust});
      }
      Block restart = on_switch(ev, b_sw);
      rec.switches.push_back(std::move(ev));
      last_switch = t_sw;
      thrust = !thrust;
      stepper.reset(t_sw, restart);
      // A switch within round-off of the end leaves nothing to integrate.
      if (t_end - t_sw < settings.min_step) break;
    }
  } catch (const PropagationError&) {
    throw;
  } catch (const SingularityError& e) {
    rec.t_end = rec.nodes.back().t;
    fail(Cause::Singularity, e.what());
  } catch (const DegenerateControlError& e) {
    rec.t_end = rec.nodes.back().t;
    fail(Cause::DegenerateControl, e.what());
  } catch (const StiffnessError& e) {
    rec.t_end = rec.nodes.back().t;
    fail(Cause::Stiffness, e.what());
  } catch (const EventError& e) {
    rec.t_end = rec.nodes.back().t;
    fail(Cause::Event, e.what());
  }

  rec.t_end = stepper.t();
  rec.rhs_evaluations = stepper.rhs_evaluations();
  if (final_block != nullptr) *final_block = stepper.y();
  return rec;
}

}  // namespace trajmc::detail
