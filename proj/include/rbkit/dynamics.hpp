#pragma once

// ----------------------------------------------------------------------------
// Rigid-body dynamics two ways.
//
// Lagrangian side: closed-form two-link planar arm terms, and for general
// chains the mass matrix from link Jacobians, Christoffel coefficients by
// central differences, and gravity torques from the potential-energy
// gradient. Link masses are modeled as point masses at the link end points;
// chains must be offset-parameterized to locate them.
//
// Newton-Euler side: rotational inertia from particle sets, parallel axis
// shifts, frame changes, spatial inertia, and the twist-wrench balance for a
// single rigid body.
// ----------------------------------------------------------------------------

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rbkit/chain.hpp"
#include "rbkit/errors.hpp"
#include "rbkit/screw.hpp"
#include "rbkit/se3.hpp"

namespace rbkit {

// ---------------------------------------------------------------------------
// Newton-Euler building blocks
// ---------------------------------------------------------------------------

struct Particle {
  double mass;
  Vec3 r;  // position in the body frame
};

struct ParticleSet {
  std::vector<Particle> items;
};

// Symmetric positive-semidefinite 3x3 inertia about the frame origin. The
// constructor enforces symmetry, PSD-ness, and the principal-moment triangle
// inequalities every particle-built inertia satisfies.
class RotationalInertia {
 public:
  RotationalInertia() : i_(Mat3::Zero()) {}

  explicit RotationalInertia(const Mat3& i) : i_(i) {
    if ((i - i.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw InvariantViolation("inertia matrix must be symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(i);
    const Vec3 lam = eig.eigenvalues();  // ascending
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    if (lam[0] < -1e-12 * scale) {
      throw InvariantViolation("inertia matrix must be positive semidefinite");
    }
    if (lam[0] + lam[1] < lam[2] - 1e-9 * scale) {
      throw InvariantViolation(
          "principal moments violate the realizability triangle inequality");
    }
  }

  [[nodiscard]] const Mat3& m() const { return i_; }

 private:
  Mat3 i_;
};

// 6x6 inertia in the canonical (w, v) twist ordering. Block-diagonal
// [I_b, 0; 0, m I] in a centered body frame; a frame change fills in the
// off-diagonal blocks, so the matrix is stored in full.
class SpatialInertia {
 public:
  SpatialInertia(const RotationalInertia& ib, double mass)
      : g_(Mat6::Zero()), m_(mass) {
    if (!(mass > 0.0)) {
      throw InvariantViolation("spatial inertia needs a positive mass");
    }
    g_.topLeftCorner<3, 3>() = ib.m();
    g_.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  }

  static SpatialInertia from_matrix(const Mat6& g, double mass) {
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw InvariantViolation("spatial inertia matrix must be symmetric");
    }
    SpatialInertia s;
    s.g_ = 0.5 * (g + g.transpose());
    s.m_ = mass;
    return s;
  }

  [[nodiscard]] const Mat6& matrix() const { return g_; }
  [[nodiscard]] double mass() const { return m_; }

 private:
  SpatialInertia() : g_(Mat6::Zero()), m_(0.0) {}

  Mat6 g_;
  double m_;
};

/// @brief Inertia of a particle set about its frame origin, I = -sum m r^ r^.
/// @throws NotCentered unless sum(m r) vanishes within 1e-9.
[[nodiscard]] inline RotationalInertia inertia_from_particles(
    const ParticleSet& ps) {
  Vec3 moment = Vec3::Zero();
  for (const auto& p : ps.items) {
    if (!(p.mass > 0.0)) {
      throw InvariantViolation("particle masses must be positive");
    }
    moment += p.mass * p.r;
  }
  if (moment.norm() > 1e-9) {
    throw NotCentered("particle set is not centered on the frame origin");
  }
  Mat3 i = Mat3::Zero();
  for (const auto& p : ps.items) {
    const Mat3 rh = hat3(p.r);
    i -= p.mass * (rh * rh);
  }
  return RotationalInertia(i);
}

/// @brief Inertia about a frame displaced by q: I + m (q.q I - q q^T).
[[nodiscard]] inline RotationalInertia parallel_axis(const RotationalInertia& ib,
                                                     double mass,
                                                     const Vec3& q) {
  if (!(mass > 0.0)) {
    throw InvariantViolation("parallel_axis needs a positive mass");
  }
  const Mat3 shift = q.dot(q) * Mat3::Identity() - q * q.transpose();
  return RotationalInertia(ib.m() + mass * shift);
}

/// @brief Inertia re-expressed in frame a, where r maps frame-a coordinates
/// into the frame the inertia is currently written in: I_a = R^T I_c R.
[[nodiscard]] inline RotationalInertia inertia_change_frame(
    const Rotation& r, const RotationalInertia& ic) {
  const Mat3 x = r.matrix().transpose() * ic.m() * r.matrix();
  return RotationalInertia(0.5 * (x + x.transpose()));
}

[[nodiscard]] inline double rotational_ke(const RotationalInertia& i,
                                          const Vec3& w) {
  return 0.5 * w.dot(i.m() * w);
}

[[nodiscard]] inline double spatial_ke(const SpatialInertia& g,
                                       const Twist& nu) {
  const Vec6 v = nu.vec6();
  return 0.5 * v.dot(g.matrix() * v);
}

/// @brief Twist adjoint [[w^, 0], [v^, w^]]: the Lie bracket matrix
/// ad(nu1) nu2 = [nu1, nu2].
[[nodiscard]] inline Mat6 twist_ad(const Twist& nu) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = hat3(nu.w);
  ad.bottomLeftCorner<3, 3>() = hat3(nu.v);
  ad.bottomRightCorner<3, 3>() = hat3(nu.w);
  return ad;
}

/// @brief Spatial inertia under a frame change, G_a = Ad(T)^T G_c Ad(T),
/// with T the transform from frame a to frame c.
[[nodiscard]] inline SpatialInertia spatial_inertia_change_frame(
    const Transform& t, const SpatialInertia& gc) {
  const Mat6 ad = adjoint(t);
  return SpatialInertia::from_matrix(ad.transpose() * gc.matrix() * ad,
                                     gc.mass());
}

/// @brief Wrench sustaining a body twist and its rate in a centered body
/// frame: w = G nudot - ad(nu)^T G nu. Torque block I w. + w x I w, force
/// block m (v. + w x v).
[[nodiscard]] inline Wrench body_wrench(const SpatialInertia& gb,
                                        const Twist& nu, const Twist& nu_dot) {
  const Vec6 w =
      gb.matrix() * nu_dot.vec6() -
      twist_ad(nu).transpose() * (gb.matrix() * nu.vec6());
  return Wrench{w.head<3>(), w.tail<3>()};
}

/// @brief Torque for a pure rotation in a centered body frame:
/// tau = I wdot + w x (I w).
[[nodiscard]] inline Vec3 euler_torque(const RotationalInertia& ib,
                                       const Vec3& w, const Vec3& w_dot) {
  return ib.m() * w_dot + w.cross(ib.m() * w);
}

// ---------------------------------------------------------------------------
// Lagrangian side
// ---------------------------------------------------------------------------

// Planar two-link arm in the x-y plane, revolute joints about +z, gravity
// pulling along -y, both link masses concentrated at the link end points.
struct TwoLinkParams {
  double l1;
  double l2;
  double m1;
  double m2;
  double g = 9.81;
};

struct ArmState {
  VecX theta;
  VecX theta_dot;
  VecX theta_ddot;
};

struct TwoLinkTerms {
  MatX mass;      // 2x2, symmetric positive definite
  VecX velocity;  // Coriolis + centripetal torques
  VecX gravity;
};

namespace detail {

inline void check_two_link(const TwoLinkParams& p, const ArmState& s,
                           bool need_accel) {
  if (!(p.l1 > 0.0 && p.l2 > 0.0 && p.m1 > 0.0 && p.m2 > 0.0)) {
    throw InvariantViolation("two-link lengths and masses must be positive");
  }
  if (s.theta.size() != 2 || s.theta_dot.size() != 2 ||
      (need_accel && s.theta_ddot.size() != 2)) {
    throw DimensionMismatch("two-link state must be 2-dimensional");
  }
}

}  // namespace detail

/// @brief Force moving a unit point mass vertically: f = m qddot + m g.
[[nodiscard]] inline double euler_lagrange_1d(double m, double g,
                                              double q_ddot) {
  if (!(m > 0.0)) throw InvariantViolation("mass must be positive");
  return m * q_ddot + m * g;
}

/// @brief Closed-form mass matrix, velocity-product torques and gravity
/// torques of the planar two-link arm.
[[nodiscard]] inline TwoLinkTerms two_link_terms(const TwoLinkParams& p,
                                                 const ArmState& s) {
  detail::check_two_link(p, s, false);
  const double c2 = std::cos(s.theta[1]);
  const double s2 = std::sin(s.theta[1]);
  const double c1 = std::cos(s.theta[0]);
  const double c12 = std::cos(s.theta[0] + s.theta[1]);
  const double d1 = s.theta_dot[0];
  const double d2 = s.theta_dot[1];

  TwoLinkTerms t;
  t.mass = MatX(2, 2);
  t.mass(0, 0) = p.m1 * p.l1 * p.l1 +
                 p.m2 * (p.l1 * p.l1 + 2 * p.l1 * p.l2 * c2 + p.l2 * p.l2);
  t.mass(0, 1) = p.m2 * (p.l1 * p.l2 * c2 + p.l2 * p.l2);
  t.mass(1, 0) = t.mass(0, 1);
  t.mass(1, 1) = p.m2 * p.l2 * p.l2;

  t.velocity = VecX(2);
  t.velocity[0] = -p.m2 * p.l1 * p.l2 * s2 * (2 * d1 * d2 + d2 * d2);
  t.velocity[1] = p.m2 * p.l1 * p.l2 * s2 * d1 * d1;

  t.gravity = VecX(2);
  t.gravity[0] =
      (p.m1 + p.m2) * p.l1 * p.g * c1 + p.m2 * p.g * p.l2 * c12;
  t.gravity[1] = p.m2 * p.g * p.l2 * c12;
  return t;
}

/// @brief tau = M(theta) thetaddot + c(theta, thetadot) + g(theta).
[[nodiscard]] inline VecX two_link_inverse_dynamics(const TwoLinkParams& p,
                                                    const ArmState& s) {
  detail::check_two_link(p, s, true);
  const TwoLinkTerms t = two_link_terms(p, s);
  return t.mass * s.theta_ddot + t.velocity + t.gravity;
}

/// @brief thetaddot = M^-1 (tau - c - g).
[[nodiscard]] inline VecX two_link_forward_dynamics(const TwoLinkParams& p,
                                                    const VecX& theta,
                                                    const VecX& theta_dot,
                                                    const VecX& tau) {
  ArmState s{theta, theta_dot, VecX::Zero(2)};
  detail::check_two_link(p, s, false);
  if (tau.size() != 2) {
    throw DimensionMismatch("two-link torque must be 2-dimensional");
  }
  const TwoLinkTerms t = two_link_terms(p, s);
  return t.mass.ldlt().solve(tau - t.velocity - t.gravity);
}

namespace detail {

inline void require_mass_data(const KinematicChain& chain) {
  if (chain.param() != ChainParam::offsets) {
    throw MissingMassData(
        "dynamics needs an offset-parameterized chain to locate link masses");
  }
  if (!chain.has_mass_data()) {
    throw MissingMassData("every link needs a positive mass");
  }
}

// World positions of the link point masses at configuration q. Link i's mass
// sits at its com_offset in joint i's frame, defaulting to the next joint's
// origin (chain end point for the last link).
inline std::vector<Vec3> link_mass_points(const KinematicChain& chain,
                                          const VecX& q) {
  chain.check_config(q);
  std::vector<Vec3> points;
  points.reserve(chain.joints().size());
  Transform t;
  for (int i = 0; i < chain.size(); ++i) {
    const Joint& j = chain.joints()[i];
    const Transform motion =
        j.kind == JointKind::revolute
            ? Transform(rot_exp(chain.local_axis(i), q[i]), Vec3::Zero())
            : Transform(Rotation(), chain.local_axis(i) * q[i]);
    t = transform_compose(t, transform_compose(j.parent_offset, motion));
    const LinkGeom& link = chain.link_geom()[i];
    Vec3 local;
    if (link.com_offset) {
      local = *link.com_offset;
    } else if (i + 1 < chain.size()) {
      local = chain.joints()[i + 1].parent_offset.p();
    } else {
      local = chain.tail().p();
    }
    points.push_back(t.apply(local));
  }
  return points;
}

}  // namespace detail

/// @brief Configuration-dependent mass matrix M = sum_i m_i Jv_i^T Jv_i,
/// where Jv_i is the positional Jacobian of link i's point mass.
[[nodiscard]] inline MatX mass_matrix_general(const KinematicChain& chain,
                                              const VecX& theta) {
  detail::require_mass_data(chain);
  const int n = chain.size();
  const Jacobian js = space_jacobian(chain, theta);
  const std::vector<Vec3> points = detail::link_mass_points(chain, theta);
  MatX m = MatX::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    MatX jv = MatX::Zero(3, n);
    for (int j = 0; j <= i; ++j) {
      const Vec3 w = js.m.col(j).head<3>();
      const Vec3 v = js.m.col(j).tail<3>();
      jv.col(j) = v + w.cross(points[static_cast<std::size_t>(i)]);
    }
    m += chain.link_geom()[static_cast<std::size_t>(i)].mass *
         (jv.transpose() * jv);
  }
  return m;
}

/// @brief Christoffel coefficients of the mass matrix by central differences
/// (h = 1e-6): Gamma[i](j,k) = (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) / 2.
[[nodiscard]] inline std::vector<MatX> christoffel(const KinematicChain& chain,
                                                   const VecX& theta) {
  detail::require_mass_data(chain);
  const int n = chain.size();
  const double h = 1e-6;
  std::vector<MatX> dm;
  dm.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    VecX tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    dm.push_back((mass_matrix_general(chain, tp) -
                  mass_matrix_general(chain, tm)) /
                 (2 * h));
  }
  std::vector<MatX> gamma(static_cast<std::size_t>(n), MatX::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        gamma[static_cast<std::size_t>(i)](j, k) =
            0.5 * (dm[static_cast<std::size_t>(k)](i, j) +
                   dm[static_cast<std::size_t>(j)](i, k) -
                   dm[static_cast<std::size_t>(i)](j, k));
      }
    }
  }
  return gamma;
}

/// @brief Gravity torques as the central-difference gradient (h = 1e-6) of
/// the potential V = -sum_i m_i g.x_i.
[[nodiscard]] inline VecX gravity_torque_general(const KinematicChain& chain,
                                                 const VecX& theta) {
  detail::require_mass_data(chain);
  const int n = chain.size();
  const double h = 1e-6;
  const auto potential = [&](const VecX& q) {
    const auto points = detail::link_mass_points(chain, q);
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      v -= chain.link_geom()[static_cast<std::size_t>(i)].mass *
           chain.gravity().dot(points[static_cast<std::size_t>(i)]);
    }
    return v;
  };
  VecX g(n);
  for (int i = 0; i < n; ++i) {
    VecX tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    g[i] = (potential(tp) - potential(tm)) / (2 * h);
  }
  return g;
}

/// @brief General-n inverse dynamics,
/// tau = M thetaddot + thetadot^T Gamma thetadot + g.
[[nodiscard]] inline VecX euler_lagrange_torque(const KinematicChain& chain,
                                                const ArmState& s) {
  const int n = chain.size();
  if (s.theta.size() != n || s.theta_dot.size() != n ||
      s.theta_ddot.size() != n) {
    throw DimensionMismatch("arm state length does not match chain");
  }
  const MatX m = mass_matrix_general(chain, s.theta);
  const std::vector<MatX> gamma = christoffel(chain, s.theta);
  const VecX g = gravity_torque_general(chain, s.theta);
  VecX tau = m * s.theta_ddot + g;
  for (int i = 0; i < n; ++i) {
    tau[i] += s.theta_dot.dot(gamma[static_cast<std::size_t>(i)] * s.theta_dot);
  }
  return tau;
}

/// @brief General-n forward dynamics, thetaddot = M^-1 (tau - c - g).
[[nodiscard]] inline VecX forward_dynamics_general(const KinematicChain& chain,
                                                   const VecX& theta,
                                                   const VecX& theta_dot,
                                                   const VecX& tau) {
  const int n = chain.size();
  if (theta.size() != n || theta_dot.size() != n || tau.size() != n) {
    throw DimensionMismatch("arm state length does not match chain");
  }
  const MatX m = mass_matrix_general(chain, theta);
  const std::vector<MatX> gamma = christoffel(chain, theta);
  const VecX g = gravity_torque_general(chain, theta);
  VecX rhs = tau - g;
  for (int i = 0; i < n; ++i) {
    rhs[i] -= theta_dot.dot(gamma[static_cast<std::size_t>(i)] * theta_dot);
  }
  return m.ldlt().solve(rhs);
}

}  // namespace rbkit
