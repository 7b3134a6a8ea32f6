#include "trajmc/variational.hpp"

#include <cmath>

#include "trajmc/detail/arc_propagator.hpp"

namespace trajmc {
namespace {

using StmBlock = Eigen::Matrix<double, 14, 15>;

double thrust_before(const SwitchEvent& ev, const DynamicsParams& p) {
  return ev.direction == SwitchDirection::ThrustToCoast ? p.t_max : 0.0;
}

double switch_denominator(const Vec14& y, const DynamicsParams& p, double t_before) {
  const Vec3 lr = y.segment<3>(idx::lr);
  const Vec3 lv = y.segment<3>(idx::lv);
  const double m = y(idx::m);
  const double lm = y(idx::lm);
  const double n = lv.norm();
  const Vec3 lv_dot = -lr - Vec3(-2.0 * lv.y(), 2.0 * lv.x(), 0.0);
  const double m_dot = -t_before / p.c;
  const double lm_dot = -n * t_before / (m * m);
  return (lv / n).dot(lv_dot) + (m_dot * lm + lm_dot * m) / p.c;
}

}  // namespace

std::pair<TrajectoryRecord, StmChain> propagate_with_stm(const Vec14& y0,
                                                         const DynamicsParams& params, double t0,
                                                         double t_end, double dry_mass,
                                                         const IntegratorSettings& settings) {
  if (!(t_end > t0)) {
    throw DomainError("integration span must be positive");
  }
  StmChain chain;
  StmBlock b0;
  b0.col(0) = y0;
  b0.rightCols<14>() = Mat14::Identity();

  auto rhs = [&params](bool thrust, const StmBlock& b) -> StmBlock {
    const Vec14 y = b.col(0);
    StmBlock d;
    d.col(0) = augmented_rhs(y, params, thrust);
    d.rightCols<14>().noalias() = jacobian(y, params, thrust) * b.rightCols<14>();
    return d;
  };
  auto on_switch = [&chain, &params](const SwitchEvent& ev, const StmBlock& b) -> StmBlock {
    chain.phi_blocks.push_back(b.rightCols<14>());
    chain.jumps.push_back(switch_jump(ev, params));
    StmBlock restart;
    restart.col(0) = b.col(0);
    restart.rightCols<14>() = Mat14::Identity();
    return restart;
  };

  StmBlock final_block;
  TrajectoryRecord rec = detail::propagate_arcs<StmBlock>(b0, params, t0, t_end, dry_mass,
                                                          settings, rhs, on_switch, &final_block);
  chain.phi_blocks.push_back(final_block.rightCols<14>());
  return {std::move(rec), std::move(chain)};
}

Mat14 switch_jump(const SwitchEvent& event, const DynamicsParams& params) {
  const Vec14& y = event.y_minus;
  const double t_minus = thrust_before(event, params);
  const double t_plus = params.t_max - t_minus;
  const double dt = t_minus - t_plus;  // +Tmax thrust->coast, -Tmax coast->thrust

  const double den = switch_denominator(y, params, t_minus);
  if (!(std::abs(den) >= kGrazingDenominator)) {
    throw GrazingSwitchError("grazing switch: dS/dt = " + std::to_string(den));
  }

  const Vec3 lv = y.segment<3>(idx::lv);
  const double n = lv.norm();
  const Vec3 lhat = lv / n;
  const double m = y(idx::m);
  const double lm = y(idx::lm);
  const double c = params.c;

  Mat14 corr = Mat14::Zero();
  corr.block<3, 1>(idx::v, idx::m) = dt * lm / (m * c) * lhat;
  corr.block<3, 3>(idx::v, idx::lv) = dt / m * lhat * lhat.transpose();
  corr.block<3, 1>(idx::v, idx::lm) = dt / c * lhat;
  corr(idx::m, idx::m) = dt * lm / (c * c);
  corr.block<1, 3>(idx::m, idx::lv) = dt / c * lhat.transpose();
  corr(idx::m, idx::lm) = dt * m / (c * c);
  corr(idx::lm, idx::m) = dt * lm * n / (m * m * c);
  corr.block<1, 3>(idx::lm, idx::lv) = dt / (m * m) * lv.transpose();
  corr(idx::lm, idx::lm) = dt * n / (m * c);

  return Mat14::Identity() + corr / den;
}

Mat14 switch_jump_general(const SwitchEvent& event, const DynamicsParams& params) {
  const Vec14& y = event.y_minus;
  const bool before = event.direction == SwitchDirection::ThrustToCoast;
  const Vec14 f_minus = augmented_rhs(y, params, before);
  const Vec14 f_plus = augmented_rhs(y, params, !before);

  Eigen::Matrix<double, 1, 14> ds = Eigen::Matrix<double, 1, 14>::Zero();
  const Vec3 lv = y.segment<3>(idx::lv);
  ds(idx::m) = y(idx::lm) / params.c;
  ds.segment<3>(idx::lv) = (lv / lv.norm()).transpose();
  ds(idx::lm) = y(idx::m) / params.c;

  const double s_dot = ds * f_minus;
  if (!(std::abs(s_dot) >= kGrazingDenominator)) {
    throw GrazingSwitchError("grazing switch: dS/dt = " + std::to_string(s_dot));
  }
  return Mat14::Identity() + (f_plus - f_minus) * ds / s_dot;
}

Mat14 assemble_chain(const StmChain& chain) {
  if (chain.phi_blocks.empty()) return Mat14::Identity();
  if (chain.jumps.size() + 1 != chain.phi_blocks.size()) {
    throw DomainError("STM chain needs exactly one more arc than switches");
  }
  Mat14 p = chain.phi_blocks.front();
  for (std::size_t k = 0; k < chain.jumps.size(); ++k) {
    p = (chain.phi_blocks[k + 1] * chain.jumps[k] * p).eval();
  }
  return p;
}

Mat14 assemble_chain_without_jumps(const StmChain& chain) {
  Mat14 p = Mat14::Identity();
  for (const auto& phi : chain.phi_blocks) p = (phi * p).eval();
  return p;
}

std::vector<int> state_rows(bool planar) {
  if (planar) return {idx::r + 0, idx::r + 1, idx::v + 0, idx::v + 1};
  return {0, 1, 2, 3, 4, 5};
}

std::vector<int> costate_columns(bool planar) {
  if (planar) return {idx::lr + 0, idx::lr + 1, idx::lv + 0, idx::lv + 1};
  return {7, 8, 9, 10, 11, 12};
}

Sensitivities extract_sensitivities(const Mat14& product, bool planar) {
  const auto rows = state_rows(planar);
  const auto cols = costate_columns(planar);
  Sensitivities s;
  s.g1.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  s.g2.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      s.g1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -product(rows[i], cols[j]);
    }
    s.g2(static_cast<Eigen::Index>(j)) = -product(idx::m, cols[j]);
  }
  return s;
}

}  // namespace trajmc
