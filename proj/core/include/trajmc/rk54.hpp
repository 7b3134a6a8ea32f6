#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "trajmc/errors.hpp"

namespace trajmc {

struct IntegratorSettings {
  double rtol = 1e-12;
  double atol = 1e-12;
  double max_step = 1e-2;   // TU
  double min_step = 1e-14;  // TU; smaller steps raise StiffnessError
  double initial_step = 1e-3;
  /// Switching-function magnitude accepted at a refined switch.
  double switch_tol = 1e-13;
  int max_refine_iterations = 200;
};

namespace dp54 {
// Dormand-Prince 5(4) tableau with Hairer's continuous extension.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
// PI controller constants.
inline constexpr double safe = 0.9;
inline constexpr double beta = 0.04;
inline constexpr double expo1 = 0.2 - beta * 0.75;
inline constexpr double facc1 = 5.0;   // max shrink 1/5
inline constexpr double facc2 = 0.1;   // max growth 10x
}  // namespace dp54

/// Continuous extension of one accepted step.
template <class Block>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Block, 5> rcont;

  double t1() const { return t0 + h; }

  Block at(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return rcont[0] + s * (rcont[1] + s1 * (rcont[2] + s * (rcont[3] + s1 * rcont[4])));
  }

  /// First column only; cheaper when the block carries sensitivities.
  Eigen::Matrix<double, Block::RowsAtCompileTime, 1> col0_at(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return rcont[0].col(0) +
           s * (rcont[1].col(0) +
                s1 * (rcont[2].col(0) + s * (rcont[3].col(0) + s1 * rcont[4].col(0))));
  }
};

/// Adaptive Dormand-Prince 5(4) stepper with PI step-size control.
///
/// `Block` is an Eigen matrix whose first column is the state; further
/// columns (variational equations) are advanced with the same steps but do
/// not enter the error estimate, so the state trajectory is bitwise the same
/// with or without them.
template <class Block, class Rhs>
class Dopri54 {
 public:
  Dopri54(Rhs rhs, const IntegratorSettings& settings) : rhs_(std::move(rhs)), settings_(settings) {
    h_ = std::min(settings_.initial_step, settings_.max_step);
  }

  /// Starts (or restarts) integration at (t, y). Keeps the current step size.
  void reset(double t, const Block& y) {
    t_ = t;
    y_ = y;
    comp_ = Block::Zero(y.rows(), y.cols());
    k1_ = rhs_(t_, y_);
    facold_ = 1e-4;
    last_rejected_ = false;
  }

  double t() const { return t_; }
  const Block& y() const { return y_; }
  const Block& dydt() const { return k1_; }
  double step_size() const { return h_; }
  const DenseStep<Block>& last_step() const { return dense_; }
  long rhs_evaluations() const { return n_rhs_; }

  /// Re-integrates the last accepted step from its start to `t` (inside
  /// the step) with a single full-order step. More accurate than the dense
  /// interpolant, which matters where integration restarts, e.g. at events.
  Block restep_to(double t) {
    using namespace dp54;
    const double h = t - dense_.t0;
    const Block& y = dense_.rcont[0];
    if (h == 0.0) return y;
    const double t0 = dense_.t0;
    const Block k1 = rhs_(t0, y);
    const Block k2 = rhs_(t0 + c2 * h, Block(y + h * (a21 * k1)));
    const Block k3 = rhs_(t0 + c3 * h, Block(y + h * (a31 * k1 + a32 * k2)));
    const Block k4 = rhs_(t0 + c4 * h, Block(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Block k5 = rhs_(t0 + c5 * h, Block(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Block k6 =
        rhs_(t0 + h, Block(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    n_rhs_ += 6;
    return y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  }

  /// Takes one accepted step that ends at or before `t_limit` (> t()).
  const DenseStep<Block>& step(double t_limit) {
    using namespace dp54;
    for (;;) {
      double h = std::min(h_, settings_.max_step);
      bool clipped = false;
      if (t_ + h >= t_limit) {
        h = t_limit - t_;
        clipped = true;
      }
      if (h < settings_.min_step) {
        throw StiffnessError("step size underflow at t=" + std::to_string(t_));
      }

      const Block k2 = rhs_(t_ + c2 * h, Block(y_ + h * (a21 * k1_)));
      const Block k3 = rhs_(t_ + c3 * h, Block(y_ + h * (a31 * k1_ + a32 * k2)));
      const Block k4 = rhs_(t_ + c4 * h, Block(y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3)));
      const Block k5 =
          rhs_(t_ + c5 * h, Block(y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4)));
      const Block y6 = y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const Block k6 = rhs_(t_ + h, y6);
      // Compensated (Kahan) update: over long arcs the rounding of y + dy
      // otherwise dominates the truncation error.
      const Block dy = h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6) - comp_;
      const Block y1 = y_ + dy;
      const Block k7 = rhs_(t_ + h, y1);
      n_rhs_ += 6;

      const auto err_vec =
          (h * (e1 * k1_.col(0) + e3 * k3.col(0) + e4 * k4.col(0) + e5 * k5.col(0) +
                e6 * k6.col(0) + e7 * k7.col(0)))
              .eval();
      double err = 0.0;
      for (Eigen::Index i = 0; i < err_vec.size(); ++i) {
        const double sk = settings_.atol +
                          settings_.rtol * std::max(std::abs(y_(i, 0)), std::abs(y1(i, 0)));
        const double q = err_vec(i) / sk;
        err += q * q;
      }
      err = std::sqrt(err / static_cast<double>(err_vec.size()));
      if (!std::isfinite(err)) {
        err = 1e10;
      }

      const double fac11 = std::pow(err, expo1);
      double fac = fac11 / std::pow(facold_, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double h_new = h / fac;

      if (err <= 1.0) {
        facold_ = std::max(err, 1e-4);
        if (last_rejected_) {
          h_new = std::min(h_new, h);
        }
        last_rejected_ = false;

        dense_.t0 = t_;
        dense_.h = h;
        dense_.rcont[0] = y_;
        dense_.rcont[1] = y1 - y_;
        dense_.rcont[2] = h * k1_ - dense_.rcont[1];
        dense_.rcont[3] = dense_.rcont[1] - h * k7 - dense_.rcont[2];
        dense_.rcont[4] = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

        t_ = clipped ? t_limit : t_ + h;
        comp_ = (y1 - y_) - dy;
        y_ = y1;
        k1_ = k7;
        // A clipped final step says nothing about the natural step size.
        if (!clipped || h_new < h_) {
          h_ = std::min(h_new, settings_.max_step);
        }
        return dense_;
      }
      h_ = h / std::min(facc1, fac11 / safe);
      last_rejected_ = true;
    }
  }

 private:
  Rhs rhs_;
  IntegratorSettings settings_;
  double t_ = 0.0;
  double h_ = 0.0;
  double facold_ = 1e-4;
  bool last_rejected_ = false;
  Block y_;
  Block comp_;
  Block k1_;
  DenseStep<Block> dense_;
  long n_rhs_ = 0;
};

/// Illinois-safeguarded regula falsi for a sign change of `f` on [a, b].
/// Stops when |f| < ftol. Throws EventError if the bracket is invalid or the
/// iteration budget runs out.
template <class F>
double refine_root(F&& f, double a, double b, double fa, double fb, double ftol,
                   int max_iterations) {
  if (std::abs(fa) < ftol) return a;
  if (std::abs(fb) < ftol) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw EventError("root bracket without sign change");
  }
  int side = 0;
  for (int it = 0; it < max_iterations; ++it) {
    double t = (a * fb - b * fa) / (fb - fa);
    if (!(t > std::min(a, b) && t < std::max(a, b))) {
      t = 0.5 * (a + b);
    }
    const double ft = f(t);
    if (std::abs(ft) < ftol) return t;
    if ((ft > 0.0) == (fb > 0.0)) {
      b = t;
      fb = ft;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = t;
      fa = ft;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (a == b || std::nextafter(std::min(a, b), std::max(a, b)) >= std::max(a, b)) {
      // Bracket collapsed to adjacent doubles: the best representable root.
      return std::abs(fa) < std::abs(fb) ? a : b;
    }
  }
  throw EventError("root refinement did not converge");
}

}  // namespace trajmc
