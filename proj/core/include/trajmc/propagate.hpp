#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "trajmc/dynamics.hpp"
#include "trajmc/errors.hpp"
#include "trajmc/rk54.hpp"
#include "trajmc/types.hpp"

namespace trajmc {

enum class SwitchDirection { ThrustToCoast, CoastToThrust };

struct SwitchEvent {
  double t_switch = 0.0;
  Vec14 y_minus;
  SwitchDirection direction = SwitchDirection::ThrustToCoast;
};

struct TrajectoryNode {
  double t = 0.0;
  Vec14 y;
  /// Arc flag of the step that produced this node (initial flag for node 0).
  bool thrust_on = false;
};

/// Dense record of one propagation: every accepted step plus switch points.
struct TrajectoryRecord {
  std::vector<TrajectoryNode> nodes;
  std::vector<SwitchEvent> switches;
  double t0 = 0.0;
  double t_end = 0.0;
  long rhs_evaluations = 0;

  const TrajectoryNode& back() const { return nodes.back(); }
  bool empty() const { return nodes.empty(); }
};

/// Failure during propagation. Carries whatever was integrated up to the
/// failure so callers can still use the valid prefix.
class PropagationError : public Error {
 public:
  enum class Cause { Stiffness, Singularity, FuelExhausted, Event, DegenerateControl, NonFinite };

  PropagationError(Cause cause, const std::string& what, TrajectoryRecord partial)
      : Error(what), cause_(cause),
        partial_(std::make_shared<const TrajectoryRecord>(std::move(partial))) {}

  Cause cause() const { return cause_; }
  const TrajectoryRecord& partial() const { return *partial_; }

 private:
  Cause cause_;
  std::shared_ptr<const TrajectoryRecord> partial_;
};

const char* to_string(PropagationError::Cause cause);

/// Initial arc flag: thrust iff S(y0) > 0.
bool initial_thrust_flag(const Vec14& y0, double c);

/// Integrates the augmented dynamics over [t0, t_end] with switch detection.
/// `dry_mass` bounds the mass from below; reaching it raises a
/// FuelExhausted PropagationError whose partial record ends at exhaustion.
TrajectoryRecord integrate(const Vec14& y0, const DynamicsParams& params, double t0, double t_end,
                           double dry_mass, const IntegratorSettings& settings = {});

/// Locates the zero of S inside one accepted step. `s_a`/`s_b` are the
/// switching-function values at the step ends and must differ in sign.
double refine_switch(const DenseStep<Vec14>& step, double s_a, double s_b, double c,
                     const IntegratorSettings& settings = {});

/// CSV export: t, y1..y14, thrust_on.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);

}  // namespace trajmc
