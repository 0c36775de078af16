#pragma once

// ----------------------------------------------------------------------------
// Screw algebra: twists, screw axes, wrenches, their hat-matrix forms, frame
// changes through the adjoint, the SE(3) exponential/logarithm, and the
// power pairing between motion and load.
// ----------------------------------------------------------------------------

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "rbkit/errors.hpp"
#include "rbkit/se3.hpp"

namespace rbkit {

/**
 * @brief Spatial velocity: angular part w (rad/s) stacked over linear part v
 * (m/s). The angular-first ordering is canonical for every 6-vector in this
 * library.
 */
struct Twist {
  Vec3 w{0.0, 0.0, 0.0};
  Vec3 v{0.0, 0.0, 0.0};

  [[nodiscard]] Vec6 vec6() const {
    Vec6 n;
    n << w, v;
    return n;
  }

  [[nodiscard]] static Twist from_vec6(const Vec6& n) {
    return Twist{n.head<3>(), n.tail<3>()};
  }
};

/**
 * @brief Generalized force: torque tau (N m) stacked over force f (N), same
 * ordering as Twist so the power pairing is a plain dot product.
 */
struct Wrench {
  Vec3 tau{0.0, 0.0, 0.0};
  Vec3 f{0.0, 0.0, 0.0};

  [[nodiscard]] Vec6 vec6() const {
    Vec6 n;
    n << tau, f;
    return n;
  }

  [[nodiscard]] static Wrench from_vec6(const Vec6& n) {
    return Wrench{n.head<3>(), n.tail<3>()};
  }
};

/**
 * @brief Unit-normalized twist. Exactly one of these holds within 1e-9:
 * |w| = 1 (rotational screw), or w = 0 and |v| = 1 (pure translation).
 */
class ScrewAxis {
 public:
  ScrewAxis(const Vec3& w, const Vec3& v) : w_(w), v_(v) {
    const double wn = w.norm();
    if (std::abs(wn - 1.0) <= 1e-9) {
      return;
    }
    if (wn <= 1e-9 && std::abs(v.norm() - 1.0) <= 1e-9) {
      w_ = Vec3::Zero();
      return;
    }
    throw InvariantViolation(
        "ScrewAxis: need |w| = 1, or w = 0 with |v| = 1");
  }

  [[nodiscard]] const Vec3& w() const { return w_; }
  [[nodiscard]] const Vec3& v() const { return v_; }
  [[nodiscard]] bool translational() const { return w_.isZero(0.0); }

  [[nodiscard]] Twist twist() const { return Twist{w_, v_}; }
  [[nodiscard]] Vec6 vec6() const { return twist().vec6(); }

 private:
  Vec3 w_;
  Vec3 v_;
};

/// Line-geometry view of a screw: unit direction, a point on the axis, pitch
/// (m per rad; flagged infinite for pure translation), and the motion rate.
struct ScrewGeometry {
  Vec3 axis_dir{0.0, 0.0, 1.0};
  Vec3 point{0.0, 0.0, 0.0};
  double pitch{0.0};
  bool pitch_infinite{false};
  double rate{0.0};
};

/// @brief 4x4 matrix form of a twist: [[hat(w), v], [0, 0]].
[[nodiscard]] inline Mat4 twist_hat(const Twist& n) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat3(n.w);
  m.topRightCorner<3, 1>() = n.v;
  return m;
}

/// @brief Inverse of twist_hat.
/// @throws BadStructure if the bottom row is nonzero or the top-left block is
/// not skew-symmetric (tolerance 1e-9).
[[nodiscard]] inline Twist twist_vee(const Mat4& m) {
  if (m.bottomRows<1>().cwiseAbs().maxCoeff() > 1e-9) {
    throw BadStructure("twist_vee: bottom row must be zero");
  }
  const Mat3 a = m.topLeftCorner<3, 3>();
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw BadStructure("twist_vee: top-left block must be skew-symmetric");
  }
  return Twist{Vec3(a(2, 1), a(0, 2), a(1, 0)), m.topRightCorner<3, 1>()};
}

namespace detail {

// Tolerant extraction used where the 4x4 comes from finite differences: take
// the antisymmetric part instead of validating skewness.
[[nodiscard]] inline Twist twist_from_blocks(const Mat4& m) {
  const Mat3 a = 0.5 * (m.topLeftCorner<3, 3>() -
                        m.topLeftCorner<3, 3>().transpose().eval());
  return Twist{Vec3(a(2, 1), a(0, 2), a(1, 0)), m.topRightCorner<3, 1>()};
}

inline void check_tdot(const Mat4& tdot) {
  if (tdot.bottomRows<1>().cwiseAbs().maxCoeff() != 0.0) {
    throw BadStructure("pose derivative must have a zero bottom row");
  }
}

}  // namespace detail

/// @brief World-frame twist of a moving pose: vee(Tdot * T^-1). The linear
/// part is pdot - w x p, the velocity of the point of the body instantly at
/// the world origin.
[[nodiscard]] inline Twist twist_world(const Transform& t, const Mat4& tdot) {
  detail::check_tdot(tdot);
  return detail::twist_from_blocks(tdot *
                                   transform_inverse(t).as_matrix());
}

/// @brief Body-frame twist of a moving pose: vee(T^-1 * Tdot).
[[nodiscard]] inline Twist twist_body(const Transform& t, const Mat4& tdot) {
  detail::check_tdot(tdot);
  return detail::twist_from_blocks(transform_inverse(t).as_matrix() * tdot);
}

/// @brief Re-express a twist through a precomputed adjoint:
/// w' = R w, v' = hat(p) R w + R v.
[[nodiscard]] inline Twist twist_change_frame(const Mat6& ad,
                                              const Twist& n) {
  return Twist::from_vec6(ad * n.vec6());
}

/// @brief Split a twist into a unit screw axis and a nonnegative rate, with
/// rate * axis == twist. Rate is |w|, or |v| when the twist is a pure
/// translation.
/// @throws ZeroTwist for the zero twist (no axis is defined).
[[nodiscard]] inline std::pair<ScrewAxis, double> screw_normalize(
    const Twist& n) {
  const double wn = n.w.norm();
  if (wn > 1e-12) {
    return {ScrewAxis(n.w / wn, n.v / wn), wn};
  }
  const double vn = n.v.norm();
  if (vn > 1e-12) {
    return {ScrewAxis(Vec3::Zero(), n.v / vn), vn};
  }
  throw ZeroTwist("screw_normalize: zero twist has no axis");
}

/// @brief Line geometry of a twist: direction, pitch, rate, and the unique
/// axis point orthogonal to the direction (the point closest to the origin).
/// A pure translation gets the infinite-pitch flag and point = origin.
/// @throws ZeroTwist for the zero twist.
[[nodiscard]] inline ScrewGeometry screw_geometry(const Twist& n) {
  const double wn = n.w.norm();
  ScrewGeometry geo;
  if (wn > 1e-12) {
    geo.axis_dir = n.w / wn;
    geo.rate = wn;
    geo.pitch = geo.axis_dir.dot(n.v) / wn;
    geo.point = geo.axis_dir.cross(n.v) / wn;
    return geo;
  }
  const double vn = n.v.norm();
  if (vn <= 1e-12) {
    throw ZeroTwist("screw_geometry: zero twist has no axis");
  }
  geo.axis_dir = n.v / vn;
  geo.rate = vn;
  geo.pitch_infinite = true;
  geo.pitch = std::numeric_limits<double>::infinity();
  geo.point = Vec3::Zero();
  return geo;
}

/// @brief Exponential map se(3) -> SE(3): the pose reached by moving along
/// screw s for q (rad, or m for a translational screw).
///
/// Rotational screw: R = rot_exp(w q), p = (I q + (1 - cos q) hat(w)
/// + (q - sin q) hat(w)^2) v. Translational screw: pure translation v q.
[[nodiscard]] inline Transform se3_exp(const ScrewAxis& s, double q) {
  if (s.translational()) {
    return Transform(Rotation(), s.v() * q);
  }
  const Mat3 wh = hat3(s.w());
  const Mat3 g = Mat3::Identity() * q + (1.0 - std::cos(q)) * wh +
                 (q - std::sin(q)) * (wh * wh);
  return Transform(rot_exp(s.w(), q), g * s.v());
}

/// @brief Logarithm map SE(3) -> (screw, q), inverse of se3_exp for rotation
/// angles below pi - 1e-6. Rotation branch solves G v = p with the analytic
/// G^-1 = I/q - hat(w)/2 + (1/q - cot(q/2)/2) hat(w)^2 (series fallback for
/// q < 1e-4). Identity-rotation branch returns the pure translation screw.
/// @throws NearPiRotation when the rotation angle reaches pi - 1e-6.
[[nodiscard]] inline std::pair<ScrewAxis, double> se3_log(const Transform& t) {
  const AxisAngle aa = rot_log(t.r());
  if (aa.angle >= M_PI - 1e-6) {
    throw NearPiRotation("se3_log: rotation angle too close to pi");
  }
  if (aa.angle < 1e-12) {
    const double pn = t.p().norm();
    if (pn == 0.0) {
      return {ScrewAxis(Vec3(0, 0, 1), Vec3::Zero()), 0.0};
    }
    return {ScrewAxis(Vec3::Zero(), t.p() / pn), pn};
  }
  const double q = aa.angle;
  const Mat3 wh = hat3(aa.axis);
  double c;  // coefficient of hat(w)^2 in G^-1
  if (q < 1e-4) {
    c = q / 12.0 + q * q * q / 720.0;
  } else {
    c = 1.0 / q - 0.5 / std::tan(0.5 * q);
  }
  const Mat3 ginv =
      Mat3::Identity() / q - 0.5 * wh + c * (wh * wh);
  return {ScrewAxis(aa.axis, ginv * t.p()), q};
}

/// @brief Fixed point of a planar motion (rotation about z, translation in
/// the x-y plane): the p* with T(p*) = p*, i.e. (I - R) p* = p on the x-y
/// block. Returned with z = 0.
/// @throws PureTranslation when the rotation angle is below 1e-9 (the fixed
/// point escapes to infinity).
/// @throws InvariantViolation if the motion is not z-planar.
[[nodiscard]] inline Vec3 planar_fixed_point(const Transform& t) {
  const Mat3& r = t.r().matrix();
  const bool planar = std::abs(r(0, 2)) < 1e-9 && std::abs(r(1, 2)) < 1e-9 &&
                      std::abs(r(2, 0)) < 1e-9 && std::abs(r(2, 1)) < 1e-9 &&
                      std::abs(r(2, 2) - 1.0) < 1e-9 &&
                      std::abs(t.p().z()) < 1e-9;
  if (!planar) {
    throw InvariantViolation("planar_fixed_point: motion is not z-planar");
  }
  const double angle = std::atan2(r(1, 0), r(0, 0));
  if (std::abs(angle) < 1e-9) {
    throw PureTranslation("planar_fixed_point: rotation angle is zero");
  }
  // Solve the 2x2 system (I - R) p* = p.
  const double a = 1.0 - r(0, 0);
  const double b = -r(0, 1);
  const double det = a * a + b * b;  // (1-c)^2 + s^2 = 2(1 - cos angle) > 0
  const double px = t.p().x();
  const double py = t.p().y();
  return Vec3((a * px - b * py) / det, (b * px + a * py) / det, 0.0);
}

/// @brief Re-express a wrench: given t mapping frame-a coordinates to the
/// frame b in which w is expressed, returns the same physical wrench in
/// frame-a coordinates, adjoint(t)^T * w.
[[nodiscard]] inline Wrench wrench_change_frame(const Transform& t,
                                                const Wrench& w) {
  return Wrench::from_vec6(adjoint(t).transpose() * w.vec6());
}

/// @brief Power delivered by a wrench through a twist: tau . w + f . v.
/// Frame-invariant under paired transforms of both arguments.
[[nodiscard]] inline double power(const Twist& n, const Wrench& w) {
  return w.tau.dot(n.w) + w.f.dot(n.v);
}

}  // namespace rbkit
