#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "rbkit/chain.hpp"
#include "rbkit/errors.hpp"
#include "rbkit/screw.hpp"
#include "rbkit/se3.hpp"

namespace rbkit {

struct IkGoal {
  Transform target;
};

// Newton-Raphson controls. step_scale in (0, 1]; tol is the loss threshold;
// dls_damping is the least-squares regularizer used while use_dls is on.
// adaptive_damping rescales it to dls_damping * (1 - s_min/s_max)^2 so the
// solver damps hard only near rank loss.
struct IkSettings {
  double step_scale = 0.5;
  double tol = 1e-6;
  int max_iters = 200;
  double dls_damping = 1e-4;
  bool use_dls = true;
  bool adaptive_damping = false;
};

struct IkResult {
  VecX q;
  bool converged = false;
  int iters = 0;
  double final_loss = 0.0;
  std::vector<double> loss_trace;
};

struct PoseError {
  Vec3 dp;
  Vec3 dw;
  double loss;
};

struct SingularityReport {
  VecX config;
  double det = 0.0;
  bool has_det = false;
  double sigma_min = 0.0;
  double condition = 0.0;
  bool flagged = false;
};

// Position gap plus the log of the relative rotation; the scalar loss is
// ||dp||^2 + ||dw||^2, zero exactly when the poses coincide.
inline PoseError pose_error(const Transform& current, const Transform& target) {
  PoseError e;
  e.dp = target.p() - current.p();
  const Rotation rel(target.r().matrix() * current.r().matrix().transpose());
  e.dw = rot_log(rel).vector();
  e.loss = e.dp.squaredNorm() + e.dw.squaredNorm();
  return e;
}

// (J^T J + lambda I)^-1 J^T: the minimizer of ||J x - e||^2 + lambda ||x||^2.
// lambda = 0 is accepted only when J has full column rank.
inline MatX dls_inverse(const MatX& j, double lambda) {
  if (lambda < 0.0) throw NonPositiveDamping("damping must be nonnegative");
  const MatX a =
      j.transpose() * j + lambda * MatX::Identity(j.cols(), j.cols());
  const Eigen::FullPivLU<MatX> lu(a);
  if (!lu.isInvertible()) {
    throw NonPositiveDamping(
        "zero damping with a rank-deficient Jacobian; use lambda > 0");
  }
  return lu.solve(MatX(j.transpose()));
}

namespace detail {

inline void check_well_conditioned(const Eigen::JacobiSVD<MatX>& svd) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 1e-12 * s(0)) {
    throw SingularJacobian("Jacobian is singular to working precision");
  }
}

}  // namespace detail

// Joint rates for a task-space velocity. Plain inversion is only attempted
// when damping is switched off and the matrix is square; everything else
// goes through the damped pseudoinverse.
inline VecX velocity_ik(const MatX& j, const VecX& nu,
                        const IkSettings& settings = {}) {
  if (nu.size() != j.rows()) {
    throw DimensionMismatch("velocity length does not match Jacobian rows");
  }
  if (!settings.use_dls) {
    if (j.rows() != j.cols()) {
      throw DimensionMismatch("plain inversion requires a square Jacobian");
    }
    Eigen::JacobiSVD<MatX> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::check_well_conditioned(svd);
    return svd.solve(nu);
  }
  return dls_inverse(j, settings.dls_damping) * nu;
}

inline VecX velocity_ik(const Jacobian& j, const Twist& nu,
                        const IkSettings& settings = {}) {
  return velocity_ik(j.m, VecX(nu.vec6()), settings);
}

// One Newton-Raphson update toward the goal pose. Returns the stepped
// configuration and the loss at the input configuration.
inline std::pair<VecX, double> nr_step(const KinematicChain& chain,
                                       const VecX& q, const IkGoal& goal,
                                       const IkSettings& settings = {}) {
  const PoseError err = pose_error(fk_poe(chain, q), goal.target);
  Vec6 e6;
  e6 << err.dw, err.dp;

  const MatX j = endpoint_jacobian(chain, q);
  VecX dq;
  if (settings.use_dls) {
    double lambda = settings.dls_damping;
    if (settings.adaptive_damping) {
      const Eigen::JacobiSVD<MatX> svd(j);
      const auto& s = svd.singularValues();
      const double smax = s(0);
      const double ratio = smax > 0.0 ? s(s.size() - 1) / smax : 0.0;
      lambda = settings.dls_damping * (1.0 - ratio) * (1.0 - ratio);
    }
    dq = dls_inverse(j, lambda) * e6;
  } else {
    Eigen::JacobiSVD<MatX> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::check_well_conditioned(svd);
    dq = svd.solve(e6);
  }
  return {q + settings.step_scale * dq, err.loss};
}

// Iterates nr_step until the loss drops to tol. Non-convergence is reported
// in the result, not thrown; loss_trace holds the loss after 0, 1, ... steps.
inline IkResult solve_ik(const KinematicChain& chain, const VecX& q0,
                         const IkGoal& goal, const IkSettings& settings = {}) {
  IkResult r;
  r.q = q0;
  r.final_loss = pose_error(fk_poe(chain, q0), goal.target).loss;
  r.loss_trace.push_back(r.final_loss);
  if (r.final_loss <= settings.tol) {
    r.converged = true;
    return r;
  }
  for (int it = 1; it <= settings.max_iters; ++it) {
    r.q = nr_step(chain, r.q, goal, settings).first;
    r.final_loss = pose_error(fk_poe(chain, r.q), goal.target).loss;
    r.loss_trace.push_back(r.final_loss);
    r.iters = it;
    if (r.final_loss <= settings.tol) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

// Two-link planar arm in the y-z plane, angles measured from the +y axis:
// y = l1 cos(theta) + l2 cos(theta + phi), z likewise with sin. Returns the
// elbow-down law-of-cosines solution first, then the elbow-up mirror.
inline std::array<std::pair<double, double>, 2> analytic_2link(double l1,
                                                               double l2,
                                                               double y_e,
                                                               double z_e) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) {
    throw InvariantViolation("link lengths must be positive");
  }
  const double r2 = y_e * y_e + z_e * z_e;
  const double r = std::sqrt(r2);
  if (r < 1e-12) {
    if (std::abs(l1 - l2) < 1e-12) {
      throw DegenerateTarget("origin target with equal links: any direction");
    }
    throw Unreachable("origin target is outside the reachable annulus");
  }
  if (r > l1 + l2 + 1e-9 || r < std::abs(l1 - l2) - 1e-9) {
    throw Unreachable("target outside the reachable annulus");
  }
  const auto clamp1 = [](double x) { return std::min(1.0, std::max(-1.0, x)); };
  const double beta = std::acos(clamp1((l1 * l1 + l2 * l2 - r2) / (2 * l1 * l2)));
  const double alpha = std::acos(clamp1((l1 * l1 + r2 - l2 * l2) / (2 * l1 * r)));
  const double base = std::atan2(z_e, y_e);
  const std::pair<double, double> down{base - alpha, M_PI - beta};
  const std::pair<double, double> up{base + alpha, beta - M_PI};
  return {down, up};
}

// Singular-value summary of the end-point Jacobian at one configuration.
// det is populated for square Jacobians only.
inline SingularityReport singularity_report(const KinematicChain& chain,
                                            const VecX& q) {
  SingularityReport rep;
  rep.config = q;
  const MatX j = endpoint_jacobian(chain, q);
  if (j.rows() == j.cols()) {
    rep.det = j.determinant();
    rep.has_det = true;
  }
  const Eigen::JacobiSVD<MatX> svd(j);
  const auto& s = svd.singularValues();
  rep.sigma_min = s(s.size() - 1);
  const double smax = s(0);
  rep.condition = rep.sigma_min > 0.0
                      ? smax / rep.sigma_min
                      : std::numeric_limits<double>::infinity();
  rep.flagged = rep.sigma_min < 1e-6 * smax;
  return rep;
}

namespace detail {

// Fixed uniform sampler so scans are reproducible independent of the
// standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline std::vector<SingularityReport> singularity_scan_grid(
    const KinematicChain& chain, int per_joint, double lo = -M_PI,
    double hi = M_PI) {
  if (per_joint < 1) throw InvariantViolation("grid needs at least one point");
  const int n = static_cast<int>(chain.size());
  std::vector<SingularityReport> out;
  std::vector<int> idx(n, 0);
  const auto value = [&](int k) {
    return per_joint == 1 ? lo : lo + (hi - lo) * k / (per_joint - 1);
  };
  while (true) {
    VecX q(n);
    for (int i = 0; i < n; ++i) q[i] = value(idx[i]);
    out.push_back(singularity_report(chain, q));
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < per_joint) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

inline std::vector<SingularityReport> singularity_scan_samples(
    const KinematicChain& chain, int count, std::uint64_t seed,
    double lo = -M_PI, double hi = M_PI) {
  if (count < 0) throw InvariantViolation("sample count must be nonnegative");
  std::mt19937_64 g(seed);
  const int n = static_cast<int>(chain.size());
  std::vector<SingularityReport> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    VecX q(n);
    for (int i = 0; i < n; ++i) {
      q[i] = lo + (hi - lo) * detail::unit_uniform(g);
    }
    out.push_back(singularity_report(chain, q));
  }
  return out;
}

// Angular velocity map of the x-y-z Euler composition Rx(a) Ry(b) Rz(c):
// omega = col1 * da + col2 * db + col3 * dc. Loses rank at b = pi/2.
inline Mat3 euler_xyz_angular_jacobian(double a, double b, double /*c*/) {
  Mat3 j;
  j.col(0) = Vec3(1, 0, 0);
  j.col(1) = rot_x(a).matrix() * Vec3(0, 1, 0);
  j.col(2) = rot_x(a).matrix() * rot_y(b).matrix() * Vec3(0, 0, 1);
  return j;
}

}  // namespace rbkit
