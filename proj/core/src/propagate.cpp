#include "trajmc/propagate.hpp"

#include <ostream>

#include "trajmc/csv.hpp"
#include "trajmc/detail/arc_propagator.hpp"

namespace trajmc {

const char* to_string(PropagationError::Cause cause) {
  switch (cause) {
    case PropagationError::Cause::Stiffness: return "stiffness";
    case PropagationError::Cause::Singularity: return "singularity";
    case PropagationError::Cause::FuelExhausted: return "fuel-exhausted";
    case PropagationError::Cause::Event: return "event";
    case PropagationError::Cause::DegenerateControl: return "degenerate-control";
    case PropagationError::Cause::NonFinite: return "non-finite";
  }
  return "unknown";
}

bool initial_thrust_flag(const Vec14& y0, double c) { return switching_function(y0, c) > 0.0; }

TrajectoryRecord integrate(const Vec14& y0, const DynamicsParams& params, double t0, double t_end,
                           double dry_mass, const IntegratorSettings& settings) {
  if (!(t_end > t0)) {
    throw DomainError("integration span must be positive");
  }
  auto rhs = [&params](bool thrust, const Vec14& y) -> Vec14 {
    return augmented_rhs(y, params, thrust);
  };
  auto on_switch = [](const SwitchEvent&, const Vec14& y) -> Vec14 { return y; };
  return detail::propagate_arcs<Vec14>(y0, params, t0, t_end, dry_mass, settings, rhs, on_switch);
}

double refine_switch(const DenseStep<Vec14>& step, double s_a, double s_b, double c,
                     const IntegratorSettings& settings) {
  if ((s_a > 0.0) == (s_b > 0.0) && s_a != 0.0 && s_b != 0.0) {
    throw EventError("switching function does not change sign across the step");
  }
  auto s_at = [&step, c](double t) { return switching_function(Vec14(step.col0_at(t)), c); };
  return refine_root(s_at, step.t0, step.t1(), s_a, s_b, settings.switch_tol,
                     settings.max_refine_iterations);
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  std::vector<std::string> header{"t"};
  for (int i = 1; i <= kAugmentedDim; ++i) header.push_back("y" + std::to_string(i));
  header.push_back("thrust_on");
  csv::write_row(out, header);
  std::vector<std::string> cells(header.size());
  for (const auto& n : record.nodes) {
    cells[0] = csv::format(n.t);
    for (int i = 0; i < kAugmentedDim; ++i) cells[1 + i] = csv::format(n.y(i));
    cells.back() = n.thrust_on ? "1" : "0";
    csv::write_row(out, cells);
  }
}

}  // namespace trajmc
