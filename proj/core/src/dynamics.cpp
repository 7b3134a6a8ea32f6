#include "trajmc/dynamics.hpp"

#include <cmath>

#include "trajmc/errors.hpp"

namespace trajmc {
namespace {

struct PrimaryDistances {
  Vec3 d1;  // from the primary at (-mu, 0, 0)
  Vec3 d2;  // from the secondary at (1 - mu, 0, 0)
  double rho1;
  double rho2;
};

PrimaryDistances distances(const Vec3& r, double mu) {
  PrimaryDistances p;
  p.d1 = Vec3(r.x() + mu, r.y(), r.z());
  p.d2 = Vec3(r.x() - 1.0 + mu, r.y(), r.z());
  p.rho1 = p.d1.norm();
  p.rho2 = p.d2.norm();
  if (p.rho1 < kSingularityRadius || p.rho2 < kSingularityRadius) {
    throw SingularityError("position within singularity radius of a primary");
  }
  return p;
}

// mu_k (3 d d^T / rho^5 - I / rho^3)
Mat3 point_mass_hessian(const Vec3& d, double rho, double gm) {
  const double r3 = rho * rho * rho;
  const double r5 = r3 * rho * rho;
  return gm * (3.0 * d * d.transpose() / r5 - Mat3::Identity() / r3);
}

// d/dr [ G_k lambda ] for one point mass term.
Mat3 point_mass_contraction_derivative(const Vec3& d, double rho, double gm, const Vec3& lam) {
  const double r2 = rho * rho;
  const double r5 = r2 * r2 * rho;
  const double r7 = r5 * r2;
  const double dl = d.dot(lam);
  return gm * (3.0 / r5 * (dl * Mat3::Identity() + d * lam.transpose() + lam * d.transpose()) -
               15.0 / r7 * dl * d * d.transpose());
}

}  // namespace

Vec3 cr3bp_accel(const Vec3& r, const Vec3& v, double mu) {
  const auto p = distances(r, mu);
  const double k1 = (1.0 - mu) / (p.rho1 * p.rho1 * p.rho1);
  const double k2 = mu / (p.rho2 * p.rho2 * p.rho2);
  Vec3 g;
  g.x() = 2.0 * v.y() + r.x() - k1 * (r.x() + mu) - k2 * (r.x() - 1.0 + mu);
  g.y() = -2.0 * v.x() + r.y() - k1 * r.y() - k2 * r.y();
  g.z() = -k1 * r.z() - k2 * r.z();
  return g;
}

Mat3 gravity_gradient(const Vec3& r, double mu) {
  const auto p = distances(r, mu);
  Mat3 g = Mat3::Zero();
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  g += point_mass_hessian(p.d1, p.rho1, 1.0 - mu);
  g += point_mass_hessian(p.d2, p.rho2, mu);
  return g;
}

Mat3 coriolis_matrix() {
  Mat3 h = Mat3::Zero();
  h(0, 1) = 2.0;
  h(1, 0) = -2.0;
  return h;
}

Mat3 gravity_gradient_contraction_derivative(const Vec3& r, const Vec3& lambda_v, double mu) {
  const auto p = distances(r, mu);
  return point_mass_contraction_derivative(p.d1, p.rho1, 1.0 - mu, lambda_v) +
         point_mass_contraction_derivative(p.d2, p.rho2, mu, lambda_v);
}

double jacobi_constant(const Vec3& r, const Vec3& v, double mu) {
  const auto p = distances(r, mu);
  const double u = 0.5 * (r.x() * r.x() + r.y() * r.y()) + (1.0 - mu) / p.rho1 + mu / p.rho2;
  return 2.0 * u - v.squaredNorm();
}

double switching_function(const Vec14& y, double c) {
  return switching_function(y.segment<3>(idx::lv).norm(), y(idx::lm), y(idx::m), c);
}

Control control_law(const Vec3& lambda_v, double s) {
  const double n = lambda_v.norm();
  Control u;
  u.throttle = s > 0.0 ? 1 : 0;
  if (n == 0.0) {
    if (u.throttle == 1) {
      throw DegenerateControlError("primer vector vanishes on a thrust arc");
    }
    u.direction = Vec3::Zero();
    return u;
  }
  u.direction = -lambda_v / n;
  return u;
}

Vec14 augmented_rhs(const Vec14& y, const DynamicsParams& p, bool thrust_on) {
  const Vec3 r = y.segment<3>(idx::r);
  const Vec3 v = y.segment<3>(idx::v);
  const double m = y(idx::m);
  const Vec3 lr = y.segment<3>(idx::lr);
  const Vec3 lv = y.segment<3>(idx::lv);
  const double t = thrust_on ? p.t_max : 0.0;

  Vec14 dy;
  dy.segment<3>(idx::r) = v;
  Vec3 acc = cr3bp_accel(r, v, p.mu);
  const double lv_norm = lv.norm();
  if (thrust_on) {
    if (lv_norm < kDegeneratePrimer) {
      throw DegenerateControlError("primer vector vanishes on a thrust arc");
    }
    acc -= (lv / lv_norm) * (t / m);
  }
  dy.segment<3>(idx::v) = acc;
  dy(idx::m) = -t / p.c;
  // G is symmetric, so G^T lambda_v = G lambda_v.
  dy.segment<3>(idx::lr) = -(gravity_gradient(r, p.mu) * lv);
  // H^T lambda_v = (-2 lv2, 2 lv1, 0)
  dy.segment<3>(idx::lv) = -lr - Vec3(-2.0 * lv.y(), 2.0 * lv.x(), 0.0);
  dy(idx::lm) = -lv_norm * t / (m * m);
  return dy;
}

Mat14 jacobian(const Vec14& y, const DynamicsParams& p, bool thrust_on) {
  const Vec3 r = y.segment<3>(idx::r);
  const double m = y(idx::m);
  const Vec3 lv = y.segment<3>(idx::lv);
  const double t = thrust_on ? p.t_max : 0.0;
  const Mat3 g = gravity_gradient(r, p.mu);
  const Mat3 h = coriolis_matrix();

  Mat14 a = Mat14::Zero();
  a.block<3, 3>(idx::r, idx::v) = Mat3::Identity();
  a.block<3, 3>(idx::v, idx::r) = g;
  a.block<3, 3>(idx::v, idx::v) = h;
  a.block<3, 3>(idx::lr, idx::r) = -gravity_gradient_contraction_derivative(r, lv, p.mu);
  a.block<3, 3>(idx::lr, idx::lv) = -g.transpose();
  a.block<3, 3>(idx::lv, idx::lr) = -Mat3::Identity();
  a.block<3, 3>(idx::lv, idx::lv) = -h.transpose();

  if (thrust_on) {
    const double n = lv.norm();
    if (n < kDegeneratePrimer) {
      throw DegenerateControlError("primer vector vanishes on a thrust arc");
    }
    const Vec3 lhat = lv / n;
    a.block<3, 1>(idx::v, idx::m) = lhat * (t / (m * m));
    a.block<3, 3>(idx::v, idx::lv) =
        -(t / m) * (Mat3::Identity() / n - lv * lv.transpose() / (n * n * n));
    a(idx::lm, idx::m) = 2.0 * n * t / (m * m * m);
    a.block<1, 3>(idx::lm, idx::lv) = -lv.transpose() * t / (n * m * m);
  }
  return a;
}

double hamiltonian(const Vec14& y, const DynamicsParams& p, double thrust) {
  const Vec3 r = y.segment<3>(idx::r);
  const Vec3 v = y.segment<3>(idx::v);
  const Vec3 lr = y.segment<3>(idx::lr);
  const Vec3 lv = y.segment<3>(idx::lv);
  const double m = y(idx::m);
  const double s = switching_function(lv.norm(), y(idx::lm), m, p.c);
  return lr.dot(v) + lv.dot(cr3bp_accel(r, v, p.mu)) - s * thrust / m;
}

Vec14 make_augmented_state(const Vec7& x0, const CostateSample& lambda) {
  Vec14 y = Vec14::Zero();
  y.head<7>() = x0;
  if (lambda.size() == 4) {
    y(idx::lr + 0) = lambda(0);
    y(idx::lr + 1) = lambda(1);
    y(idx::lv + 0) = lambda(2);
    y(idx::lv + 1) = lambda(3);
  } else if (lambda.size() == 6) {
    y.segment<3>(idx::lr) = lambda.head<3>();
    y.segment<3>(idx::lv) = lambda.tail<3>();
  } else {
    throw DomainError("costate sample must have 4 (planar) or 6 entries");
  }
  y(idx::lm) = -1.0;
  return y;
}

}  // namespace trajmc
