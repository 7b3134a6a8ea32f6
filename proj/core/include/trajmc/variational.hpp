#pragma once

#include <utility>
#include <vector>

#include "trajmc/propagate.hpp"
#include "trajmc/types.hpp"

namespace trajmc {

/// Per-arc STMs and the jump matrices between them.
struct StmChain {
  /// Phi(t_{k+1-}, t_{k+}) for each arc, in time order.
  std::vector<Mat14> phi_blocks;
  /// Psi_n for each switch, in time order.
  std::vector<Mat14> jumps;
};

/// Sensitivities of the terminal constraint violation (g1) and final mass
/// (g2) with respect to the free initial costates.
struct Sensitivities {
  Eigen::MatrixXd g1;     // 6 x d (4 x 4 planar)
  Eigen::RowVectorXd g2;  // 1 x d
};

/// Threshold on the switch-time denominator dS/dt below which a switch is
/// treated as grazing.
inline constexpr double kGrazingDenominator = 1e-10;

/// Propagates the state together with per-arc STMs. The state trajectory is
/// bitwise identical to integrate() with the same settings.
std::pair<TrajectoryRecord, StmChain> propagate_with_stm(const Vec14& y0,
                                                         const DynamicsParams& params, double t0,
                                                         double t_end, double dry_mass,
                                                         const IntegratorSettings& settings = {});

/// Psi_n, mapping perturbations across a thrust/coast switch.
/// Throws GrazingSwitchError when dS/dt at t_n- is below kGrazingDenominator.
Mat14 switch_jump(const SwitchEvent& event, const DynamicsParams& params);

/// Same map built from the general form I + (f+ - f-) (dS/dy) / Sdot; used
/// to cross-check switch_jump.
Mat14 switch_jump_general(const SwitchEvent& event, const DynamicsParams& params);

/// Phi_N Psi_N ... Psi_1 Phi_0 (earliest factor rightmost).
Mat14 assemble_chain(const StmChain& chain);

/// Same product with every Psi replaced by the identity.
Mat14 assemble_chain_without_jumps(const StmChain& chain);

/// Negated sub-blocks d(r,v)(tf)/d(lambda_r,lambda_v)(t0) and dm(tf)/d(...).
Sensitivities extract_sensitivities(const Mat14& product, bool planar);

/// Row/column index maps used by extract_sensitivities.
std::vector<int> state_rows(bool planar);
std::vector<int> costate_columns(bool planar);

}  // namespace trajmc
