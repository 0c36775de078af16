#pragma once

// ----------------------------------------------------------------------------
// Serial kinematic chains: forward kinematics by per-joint frame composition
// and by the product of exponentials, space/body/positional Jacobians, and
// the static force-torque duality.
//
// A chain can be parameterized two ways:
//   * screws:  each joint carries its screw axis in the world frame at the
//     zero configuration, plus the end pose at zero configuration,
//   * offsets: each joint carries a fixed transform from its parent joint
//     frame and a unit axis in its own frame.
// An offset chain also derives the world screws on construction, so every
// operation works on it; dynamics needs offsets because only they locate the
// link masses.
// ----------------------------------------------------------------------------

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rbkit/errors.hpp"
#include "rbkit/screw.hpp"
#include "rbkit/se3.hpp"

namespace rbkit {

using Pose = Transform;

enum class JointKind { revolute, prismatic };

// Per-link data used by dynamics: the link's point mass sits at com_offset in
// the joint's own frame (defaults to the next joint's origin, or the chain
// end point for the last link).
struct LinkGeom {
  double length{0.0};
  double mass{0.0};
  std::optional<Vec3> com_offset;
};

struct Joint {
  JointKind kind{JointKind::revolute};
  ScrewAxis screw_home;      // world frame, zero configuration
  Transform parent_offset;   // fixed transform from the parent joint frame
};

// Offset-parameterized joint used to build a chain; axis is a unit vector in
// the joint's own frame.
struct OffsetJoint {
  JointKind kind{JointKind::revolute};
  Vec3 axis{0.0, 0.0, 1.0};
  Transform offset;
};

enum class ChainParam { screws, offsets };

class KinematicChain {
 public:
  /// Build from world-frame screw axes and the end pose at q = 0.
  static KinematicChain from_screws(std::vector<std::pair<JointKind, ScrewAxis>> joints,
                                    const Transform& home_pose,
                                    std::vector<LinkGeom> links = {},
                                    const Vec3& gravity = Vec3(0, 0, -9.81)) {
    KinematicChain c;
    c.param_ = ChainParam::screws;
    c.home_pose_ = home_pose;
    for (const auto& [kind, screw] : joints) {
      check_kind(kind, screw);
      c.joints_.push_back(Joint{kind, screw, Transform()});
    }
    c.finish(std::move(links), gravity);
    return c;
  }

  /// Build from per-joint fixed offsets and joint-frame axes; tail is the
  /// fixed transform from the last joint frame to the end frame.
  static KinematicChain from_offsets(const std::vector<OffsetJoint>& joints,
                                     const Transform& tail,
                                     std::vector<LinkGeom> links = {},
                                     const Vec3& gravity = Vec3(0, 0, -9.81)) {
    KinematicChain c;
    c.param_ = ChainParam::offsets;
    c.tail_ = tail;
    Transform prefix;  // product of offsets, zero configuration
    for (const auto& oj : joints) {
      if (std::abs(oj.axis.norm() - 1.0) > 1e-9) {
        throw InvariantViolation("KinematicChain: joint axis must be unit");
      }
      prefix = transform_compose(prefix, oj.offset);
      const Vec3 dir = prefix.r().matrix() * oj.axis;
      const Vec3 point = prefix.p();
      const ScrewAxis screw =
          oj.kind == JointKind::revolute
              ? ScrewAxis(dir, -dir.cross(point))
              : ScrewAxis(Vec3::Zero(), dir);
      c.joints_.push_back(Joint{oj.kind, screw, oj.offset});
      c.local_axes_.push_back(oj.axis);
    }
    c.home_pose_ = transform_compose(prefix, tail);
    c.finish(std::move(links), gravity);
    return c;
  }

  [[nodiscard]] const std::vector<Joint>& joints() const { return joints_; }
  [[nodiscard]] int size() const { return static_cast<int>(joints_.size()); }
  [[nodiscard]] const Transform& home_pose() const { return home_pose_; }
  [[nodiscard]] const Transform& tail() const { return tail_; }
  [[nodiscard]] ChainParam param() const { return param_; }
  [[nodiscard]] const std::vector<LinkGeom>& link_geom() const {
    return links_;
  }
  [[nodiscard]] const Vec3& gravity() const { return gravity_; }
  [[nodiscard]] const Vec3& local_axis(int i) const { return local_axes_[i]; }

  [[nodiscard]] bool has_mass_data() const {
    if (param_ != ChainParam::offsets) return false;
    if (links_.size() != joints_.size()) return false;
    for (const auto& l : links_) {
      if (l.mass <= 0.0) return false;
    }
    return true;
  }

  void check_config(const VecX& q) const {
    if (q.size() != size()) {
      throw DimensionMismatch("joint vector length does not match chain");
    }
    if (!q.allFinite()) {
      throw DimensionMismatch("joint vector has non-finite entries");
    }
  }

 private:
  static void check_kind(JointKind kind, const ScrewAxis& screw) {
    if (kind == JointKind::revolute && screw.translational()) {
      throw InvariantViolation("revolute joint needs |w| = 1 in its screw");
    }
    if (kind == JointKind::prismatic && !screw.translational()) {
      throw InvariantViolation("prismatic joint needs w = 0 in its screw");
    }
  }

  void finish(std::vector<LinkGeom> links, const Vec3& gravity) {
    if (joints_.empty()) {
      throw InvariantViolation("KinematicChain: at least one joint required");
    }
    if (!links.empty() && links.size() != joints_.size()) {
      throw InvariantViolation(
          "KinematicChain: link list length must match joint count");
    }
    links_ = std::move(links);
    gravity_ = gravity;
  }

  std::vector<Joint> joints_;
  std::vector<Vec3> local_axes_;  // offsets mode only
  std::vector<LinkGeom> links_;
  Transform home_pose_;
  Transform tail_;
  Vec3 gravity_{0.0, 0.0, -9.81};
  ChainParam param_{ChainParam::screws};
};

// 6xn (or 3xn positional) Jacobian with its frame tag. Rows of 6xn variants
// are ordered angular-first.
struct Jacobian {
  enum class Frame { world, body, position };
  MatX m;
  Frame frame{Frame::world};
};

/// @brief Forward kinematics as the left product of joint screw exponentials
/// applied to the home pose.
[[nodiscard]] inline Transform fk_poe(const KinematicChain& chain,
                                      const VecX& q) {
  chain.check_config(q);
  Transform t;
  for (int i = 0; i < chain.size(); ++i) {
    t = transform_compose(t, se3_exp(chain.joints()[i].screw_home, q[i]));
  }
  return transform_compose(t, chain.home_pose());
}

namespace detail {

// Joint motion built from line geometry (rotation about an axis through a
// point, plus pitch translation) rather than the exponential closed form, so
// the two forward-kinematics routes share no arithmetic.
[[nodiscard]] inline Transform screw_factor(const ScrewAxis& s, double q) {
  if (s.translational()) {
    return Transform(Rotation(), s.v() * q);
  }
  const ScrewGeometry geo = screw_geometry(s.twist());
  const Rotation r = rot_exp(geo.axis_dir, q);
  const Vec3 p = geo.point - r.matrix() * geo.point +
                 geo.pitch * q * geo.axis_dir;
  return Transform(r, p);
}

}  // namespace detail

/// @brief Forward kinematics by composing per-joint frames left to right and
/// appending the fixed end offset.
///
/// Offset chains compose [R_i(q_i), p_i] factors; screw chains compose the
/// geometric screw motion of each joint. Agrees with fk_poe within 1e-10.
[[nodiscard]] inline Transform fk_chain_rule(const KinematicChain& chain,
                                             const VecX& q) {
  chain.check_config(q);
  Transform t;
  if (chain.param() == ChainParam::offsets) {
    for (int i = 0; i < chain.size(); ++i) {
      const Joint& j = chain.joints()[i];
      const Transform motion =
          j.kind == JointKind::revolute
              ? Transform(rot_exp(chain.local_axis(i), q[i]), Vec3::Zero())
              : Transform(Rotation(), chain.local_axis(i) * q[i]);
      t = transform_compose(t, transform_compose(j.parent_offset, motion));
    }
    return transform_compose(t, chain.tail());
  }
  for (int i = 0; i < chain.size(); ++i) {
    t = transform_compose(
        t, detail::screw_factor(chain.joints()[i].screw_home, q[i]));
  }
  return transform_compose(t, chain.home_pose());
}

/// @brief Space Jacobian: column i is joint i's screw axis re-expressed in
/// the world frame at configuration q, so twist_world = J qdot.
[[nodiscard]] inline Jacobian space_jacobian(const KinematicChain& chain,
                                             const VecX& q) {
  chain.check_config(q);
  MatX j(6, chain.size());
  Transform prefix;
  for (int i = 0; i < chain.size(); ++i) {
    j.col(i) = adjoint(prefix) * chain.joints()[i].screw_home.vec6();
    prefix = transform_compose(prefix,
                               se3_exp(chain.joints()[i].screw_home, q[i]));
  }
  return Jacobian{j, Jacobian::Frame::world};
}

/// @brief Body Jacobian: the space Jacobian re-expressed in the end frame,
/// built directly by right-to-left accumulation; twist_body = J qdot.
[[nodiscard]] inline Jacobian body_jacobian(const KinematicChain& chain,
                                            const VecX& q) {
  chain.check_config(q);
  MatX j(6, chain.size());
  Transform suffix = transform_inverse(chain.home_pose());
  for (int i = chain.size() - 1; i >= 0; --i) {
    suffix = transform_compose(
        suffix, se3_exp(chain.joints()[i].screw_home, -q[i]));
    j.col(i) = adjoint(suffix) * chain.joints()[i].screw_home.vec6();
  }
  return Jacobian{j, Jacobian::Frame::body};
}

/// @brief 3xn positional Jacobian of the end point: the linear rows of the
/// space Jacobian shifted to the end point, v_e = v + w x p_e, so
/// pdot_e = J qdot.
[[nodiscard]] inline Jacobian positional_jacobian(const KinematicChain& chain,
                                                  const VecX& q) {
  const Jacobian js = space_jacobian(chain, q);
  const Vec3 pe = fk_poe(chain, q).p();
  MatX j(3, chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    const Vec3 w = js.m.col(i).head<3>();
    const Vec3 v = js.m.col(i).tail<3>();
    j.col(i) = v + w.cross(pe);
  }
  return Jacobian{j, Jacobian::Frame::position};
}

/// @brief End-point 6xn Jacobian: angular rows of the space Jacobian over the
/// positional rows. This is the matrix the pose-goal solver inverts.
[[nodiscard]] inline MatX endpoint_jacobian(const KinematicChain& chain,
                                            const VecX& q) {
  const Jacobian js = space_jacobian(chain, q);
  const Vec3 pe = fk_poe(chain, q).p();
  MatX j(6, chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    const Vec3 w = js.m.col(i).head<3>();
    const Vec3 v = js.m.col(i).tail<3>();
    j.col(i).head<3>() = w;
    j.col(i).tail<3>() = v + w.cross(pe);
  }
  return j;
}

/// @brief Joint torques balancing an external load on the end effector:
/// tau = J^T f. The load vector length must match the Jacobian's row count
/// (6-vector in (tau, f) order for twist Jacobians, 3-force for positional).
[[nodiscard]] inline VecX static_torque(const Jacobian& j, const VecX& f) {
  if (f.size() != j.m.rows()) {
    throw DimensionMismatch("static_torque: load length != Jacobian rows");
  }
  return j.m.transpose() * f;
}

/// @brief End-effector load sustained by given joint torques under static
/// equilibrium: f = (J^T)^-1 tau, square Jacobians only.
/// @throws SingularJacobian when J^T has condition number above 1e12.
[[nodiscard]] inline VecX static_force(const Jacobian& j, const VecX& tau) {
  if (j.m.rows() != j.m.cols()) {
    throw DimensionMismatch("static_force: Jacobian must be square");
  }
  if (tau.size() != j.m.cols()) {
    throw DimensionMismatch("static_force: torque length != joint count");
  }
  const Eigen::JacobiSVD<MatX> svd(j.m,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e12) {
    throw SingularJacobian("static_force: Jacobian is singular");
  }
  return j.m.transpose().partialPivLu().solve(tau);
}

}  // namespace rbkit
