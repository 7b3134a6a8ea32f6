#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <trajmc/orbits.hpp>
#include <trajmc/propagate.hpp>

namespace oracle {

inline std::string data_path(const std::string& name) { return std::string(TRAJMC_DATA_DIR) + "/" + name; }

/// Rotating-frame CR3BP acceleration written out scalar by scalar.
inline Eigen::Vector3d accel(double x, double y, double z, double vx, double vy, double mu) {
  const double d1 = std::sqrt((x + mu) * (x + mu) + y * y + z * z);
  const double d2 = std::sqrt((x - 1 + mu) * (x - 1 + mu) + y * y + z * z);
  const double k1 = (1 - mu) / (d1 * d1 * d1);
  const double k2 = mu / (d2 * d2 * d2);
  return {2 * vy + x - k1 * (x + mu) - k2 * (x - 1 + mu), -2 * vx + y - k1 * y - k2 * y,
          -k1 * z - k2 * z};
}

/// Jacobi constant 2U - v^2 with U = (x^2 + y^2)/2 + (1-mu)/d1 + mu/d2.
inline double jacobi(const Eigen::Matrix<double, 6, 1>& s, double mu) {
  const double x = s(0), y = s(1), z = s(2);
  const double d1 = std::sqrt((x + mu) * (x + mu) + y * y + z * z);
  const double d2 = std::sqrt((x - 1 + mu) * (x - 1 + mu) + y * y + z * z);
  const double u = 0.5 * (x * x + y * y) + (1 - mu) / d1 + mu / d2;
  return 2 * u - (s(3) * s(3) + s(4) * s(4) + s(5) * s(5));
}

/// Scalar fixed-step RK4 of the natural CR3BP, independent of the library's
/// adaptive integrator.
inline Eigen::Matrix<double, 6, 1> rk4_natural(Eigen::Matrix<double, 6, 1> s, double mu, double t,
                                              int steps) {
  auto f = [mu](const Eigen::Matrix<double, 6, 1>& q) {
    Eigen::Matrix<double, 6, 1> d;
    d.head<3>() = q.segment<3>(3);
    d.tail<3>() = accel(q(0), q(1), q(2), q(3), q(4), mu);
    return d;
  };
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const auto k1 = f(s);
    const auto k2 = f(s + 0.5 * h * k1);
    const auto k3 = f(s + 0.5 * h * k2);
    const auto k4 = f(s + h * k3);
    s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return s;
}

/// (r, v) coordinates compared by the screening norm.
inline Eigen::VectorXd project(const Eigen::Matrix<double, 6, 1>& rv, bool planar) {
  if (!planar) return rv;
  Eigen::VectorXd p(4);
  p << rv(0), rv(1), rv(3), rv(4);
  return p;
}

struct BruteForce {
  double j_star = std::numeric_limits<double>::infinity();
  double e = 0;
  std::size_t node = 0;
  std::size_t sample = 0;
};

/// Exhaustive double loop over trajectory nodes and orbit samples.
inline BruteForce brute_force_jstar(const trajmc::TrajectoryRecord& rec,
                                    const std::vector<trajmc::OrbitSample>& orbit, bool planar,
                                    double kappa1, double kappa2, double m0, double tau_s_max) {
  BruteForce best;
  for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
    const auto& n = rec.nodes[i];
    const double tau_s = n.t - rec.t0;
    if (tau_s > tau_s_max) break;
    const Eigen::Matrix<double, 6, 1> rv = n.y.head<6>();
    const Eigen::VectorXd a = project(rv, planar);
    double best_d2 = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      const Eigen::VectorXd b = project(orbit[k].x, planar);
      double d2 = 0;
      for (Eigen::Index c = 0; c < a.size(); ++c) d2 += (b(c) - a(c)) * (b(c) - a(c));
      if (d2 < best_d2) {
        best_d2 = d2;
        best_k = k;
      }
    }
    const double e = std::sqrt(best_d2);
    const double dm = m0 - n.y(6);
    const double j = e + kappa1 * (dm / m0 + kappa2 * tau_s);
    if (j < best.j_star) best = {j, e, i, best_k};
  }
  return best;
}

/// Standard error of the mean from non-overlapping batch means.
inline double batch_standard_error(const std::vector<double>& x, int batches = 50) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) s += x[static_cast<std::size_t>(b) * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  double mu = 0;
  for (double m : means) mu += m;
  mu /= batches;
  double v = 0;
  for (double m : means) v += (m - mu) * (m - mu);
  v /= batches - 1;
  return std::sqrt(v / batches);
}

inline double mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double stddev(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min());
}

}  // namespace oracle
