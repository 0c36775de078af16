#pragma once

// ----------------------------------------------------------------------------
// Rigid-body rotation and pose algebra.
//
// Value types for SO(3)/SE(3) elements plus the maps between the group and
// its 3- and 6-vector coordinates: hat/vee, exponential, logarithm,
// composition, inversion, and the 6x6 adjoint of a pose.
//
// Conventions used by the whole library:
//   * angles are radians,
//   * 6-vectors are stacked angular-first: (w, v) for motion, (tau, f) for
//     load,
//   * a transform labelled "a -> w" maps coordinates expressed in frame a to
//     coordinates expressed in frame w.
// ----------------------------------------------------------------------------

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rbkit/errors.hpp"

namespace rbkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Tolerance for the orthonormality / unit-determinant checks on rotations.
inline constexpr double kRotationTol = 1e-9;

/// @brief Skew-symmetric (cross-product) matrix of w.
/// @return m with m * u == w x u for every u.
[[nodiscard]] inline Mat3 hat3(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

/// @brief Inverse of hat3.
/// @throws NotSkewSymmetric if |m + m^T|_inf > 1e-9.
[[nodiscard]] inline Vec3 vee3(const Mat3& m) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw NotSkewSymmetric("vee3: matrix is not skew-symmetric");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

/// @brief A rotation matrix, validated on construction.
///
/// Constructors check orthonormality and det = +1 within 1e-9 and refuse bad
/// input instead of silently re-orthonormalizing; see renormalize() for
/// explicit drift repair.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  explicit Rotation(const Mat3& m) : m_(m) {
    if (!m.allFinite()) {
      throw InvariantViolation("Rotation: non-finite entries");
    }
    if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() >
        kRotationTol) {
      throw InvariantViolation("Rotation: matrix is not orthonormal");
    }
    if (std::abs(m.determinant() - 1.0) > kRotationTol) {
      throw InvariantViolation("Rotation: determinant is not +1");
    }
  }

  [[nodiscard]] const Mat3& matrix() const { return m_; }

  [[nodiscard]] Rotation transposed() const {
    Rotation r;
    r.m_ = m_.transpose();
    return r;
  }

  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    Rotation r;
    r.m_ = a.m_ * b.m_;
    return r;
  }

 private:
  Mat3 m_;
};

/// @brief Axis-angle coordinates of a rotation; axis is unit length unless
/// angle is zero, in which case it is conventionally (0, 0, 1).
struct AxisAngle {
  Vec3 axis{0.0, 0.0, 1.0};
  double angle{0.0};

  [[nodiscard]] Vec3 vector() const { return axis * angle; }
};

/// @brief Exponential map so(3) -> SO(3): the rotation reached after turning
/// with constant angular velocity w for time t (Rodrigues closed form).
///
/// rot_exp(w, t) == rot_exp(w * t, 1). For |w * t| < 1e-8 second-order Taylor
/// coefficients replace sin/cos ratios to avoid cancellation.
[[nodiscard]] inline Rotation rot_exp(const Vec3& w, double t = 1.0) {
  const Vec3 a = w * t;
  const double theta = a.norm();
  Mat3 m;
  if (theta < 1e-8) {
    const Mat3 ah = hat3(a);
    const double t2 = theta * theta;
    m = Mat3::Identity() + (1.0 - t2 / 6.0) * ah +
        (0.5 - t2 / 24.0) * (ah * ah);
  } else {
    const Mat3 ah = hat3(a / theta);
    m = Mat3::Identity() + std::sin(theta) * ah +
        (1.0 - std::cos(theta)) * (ah * ah);
  }
  return Rotation(m);
}

/// @brief Logarithm map SO(3) -> axis-angle with angle in [0, pi].
///
/// The angle comes from atan2(|(R32-R23, R13-R31, R21-R12)|, tr(R) - 1). Near
/// pi that vector vanishes, so the axis is recovered from the dominant
/// diagonal of (R + I)/2 instead; accuracy degrades gracefully for angles in
/// (pi - 1e-6, pi].
[[nodiscard]] inline AxisAngle rot_log(const Rotation& r) {
  const Mat3& m = r.matrix();
  const Vec3 u(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = u.norm();
  const double theta = std::atan2(s, m.trace() - 1.0);

  if (theta < 1e-12) {
    return AxisAngle{Vec3(0.0, 0.0, 1.0), 0.0};
  }
  if (theta > M_PI - 1e-6) {
    // (R + I)/2 approaches axis * axis^T; take the column with the largest
    // diagonal entry and normalize.
    const Mat3 b = 0.5 * (m + Mat3::Identity());
    int k = 0;
    b.diagonal().maxCoeff(&k);
    Vec3 axis = b.col(k) / std::sqrt(b(k, k));
    // Fix the overall sign: against the off-diagonal antisymmetry when it is
    // still meaningful, otherwise make the largest off-diagonal pair positive.
    if (s > 1e-12) {
      if (axis.dot(u) < 0.0) axis = -axis;
    } else if (axis(k) < 0.0) {
      axis = -axis;
    }
    return AxisAngle{axis.normalized(), theta};
  }
  return AxisAngle{u / s, theta};
}

/// @brief Explicit drift repair: iterated averaging with the inverse
/// transpose until the matrix passes the Rotation checks.
/// @throws InvariantViolation if the input is not repairable (det <= 0).
[[nodiscard]] inline Rotation renormalize(const Mat3& m) {
  if (!m.allFinite() || m.determinant() <= 0.0) {
    throw InvariantViolation("renormalize: matrix is not repairable");
  }
  Mat3 x = m;
  for (int i = 0; i < 32; ++i) {
    x = 0.5 * (x + x.inverse().transpose());
    if ((x.transpose() * x - Mat3::Identity()).cwiseAbs().maxCoeff() <
        1e-15) {
      break;
    }
  }
  return Rotation(x);
}

/// @brief A rigid-body pose: rotation r plus translation p. As a 4x4
/// homogeneous matrix the bottom row is exactly (0, 0, 0, 1).
class Transform {
 public:
  Transform() = default;

  Transform(const Rotation& r, const Vec3& p) : r_(r), p_(p) {
    if (!p.allFinite()) {
      throw InvariantViolation("Transform: non-finite translation");
    }
  }

  /// @brief Build from a homogeneous 4x4 matrix; the bottom row must be
  /// exactly (0, 0, 0, 1) and the rotation block must pass Rotation checks.
  [[nodiscard]] static Transform from_matrix(const Mat4& m) {
    if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 ||
        m(3, 3) != 1.0) {
      throw InvariantViolation(
          "Transform: bottom row must be exactly (0, 0, 0, 1)");
    }
    return Transform(Rotation(m.topLeftCorner<3, 3>()),
                     m.topRightCorner<3, 1>());
  }

  [[nodiscard]] const Rotation& r() const { return r_; }
  [[nodiscard]] const Vec3& p() const { return p_; }

  [[nodiscard]] Mat4 as_matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = r_.matrix();
    m.topRightCorner<3, 1>() = p_;
    return m;
  }

  /// @brief Apply to a point: R * x + p.
  [[nodiscard]] Vec3 apply(const Vec3& x) const {
    return r_.matrix() * x + p_;
  }

 private:
  Rotation r_;
  Vec3 p_{0.0, 0.0, 0.0};
};

/// @brief Frame-change composition: (a o b)(x) = a(b(x)).
[[nodiscard]] inline Transform transform_compose(const Transform& a,
                                                 const Transform& b) {
  return Transform(a.r() * b.r(), a.r().matrix() * b.p() + a.p());
}

/// @brief Inverse pose; the rotation inverse is its transpose.
[[nodiscard]] inline Transform transform_inverse(const Transform& t) {
  const Rotation rt = t.r().transposed();
  return Transform(rt, -(rt.matrix() * t.p()));
}

/// @brief 6x6 adjoint of a pose in angular-first ordering:
/// [[R, 0], [hat(p) R, R]]. Maps twists between frames; its transpose maps
/// wrenches the other way.
[[nodiscard]] inline Mat6 adjoint(const Transform& t) {
  Mat6 ad = Mat6::Zero();
  const Mat3& r = t.r().matrix();
  ad.topLeftCorner<3, 3>() = r;
  ad.bottomRightCorner<3, 3>() = r;
  ad.bottomLeftCorner<3, 3>() = hat3(t.p()) * r;
  return ad;
}

// Single-axis rotations, used throughout the tests and the Euler-composition
// identities.
[[nodiscard]] inline Rotation rot_x(double a) {
  return rot_exp(Vec3(1.0, 0.0, 0.0), a);
}
[[nodiscard]] inline Rotation rot_y(double a) {
  return rot_exp(Vec3(0.0, 1.0, 0.0), a);
}
[[nodiscard]] inline Rotation rot_z(double a) {
  return rot_exp(Vec3(0.0, 0.0, 1.0), a);
}

}  // namespace rbkit
