#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "rbkit/dynamics.hpp"

using namespace rbkit;

namespace {

constexpr double kGravity = 9.81;

// The two-link arm as a kinematic chain: revolute joints about +z in the
// x-y plane, gravity along -y, point masses at the link ends.
KinematicChain two_link_chain(const TwoLinkParams& p) {
  std::vector<OffsetJoint> joints = {
      {JointKind::revolute, Vec3(0, 0, 1), Transform()},
      {JointKind::revolute, Vec3(0, 0, 1),
       Transform(Rotation(), Vec3(p.l1, 0, 0))},
  };
  std::vector<LinkGeom> links = {{p.l1, p.m1, std::nullopt},
                                 {p.l2, p.m2, std::nullopt}};
  return KinematicChain::from_offsets(
      joints, Transform(Rotation(), Vec3(p.l2, 0, 0)), links,
      Vec3(0, -p.g, 0));
}

ArmState random_state(std::mt19937_64& g) {
  ArmState s;
  s.theta = VecX(2);
  s.theta_dot = VecX(2);
  s.theta_ddot = VecX(2);
  for (int i = 0; i < 2; ++i) {
    s.theta[i] = oracle::uniform(g, -M_PI, M_PI);
    s.theta_dot[i] = oracle::uniform(g, -2, 2);
    s.theta_ddot[i] = oracle::uniform(g, -3, 3);
  }
  return s;
}

// Per-particle Newton assembly for the two-link arm: each point mass obeys
// f_i = m_i (a_i - g), and joint torques are the Jacobian-transpose pullback
// of those forces. Shares no arithmetic with the Lagrangian closed forms.
VecX newton_point_mass_torques(const TwoLinkParams& p, const ArmState& s) {
  const double t1 = s.theta[0], t12 = s.theta[0] + s.theta[1];
  const double d1 = s.theta_dot[0], d12 = s.theta_dot[0] + s.theta_dot[1];
  const double a1 = s.theta_ddot[0], a12 = s.theta_ddot[0] + s.theta_ddot[1];
  const Eigen::Vector2d e1(-std::sin(t1), std::cos(t1));
  const Eigen::Vector2d r1(std::cos(t1), std::sin(t1));
  const Eigen::Vector2d e12(-std::sin(t12), std::cos(t12));
  const Eigen::Vector2d r12(std::cos(t12), std::sin(t12));

  const Eigen::Vector2d acc1 = p.l1 * (e1 * a1 - r1 * d1 * d1);
  const Eigen::Vector2d acc2 = acc1 + p.l2 * (e12 * a12 - r12 * d12 * d12);
  const Eigen::Vector2d grav(0.0, -p.g);
  const Eigen::Vector2d f1 = p.m1 * (acc1 - grav);
  const Eigen::Vector2d f2 = p.m2 * (acc2 - grav);

  Eigen::Matrix2d j1 = Eigen::Matrix2d::Zero();
  j1.col(0) = p.l1 * e1;
  Eigen::Matrix2d j2;
  j2.col(0) = p.l1 * e1 + p.l2 * e12;
  j2.col(1) = p.l2 * e12;
  return j1.transpose() * f1 + j2.transpose() * f2;
}

ParticleSet random_centered_particles(std::mt19937_64& g, int count) {
  ParticleSet ps;
  double total = 0.0;
  Vec3 moment = Vec3::Zero();
  for (int i = 0; i < count; ++i) {
    const double m = oracle::uniform(g, 0.1, 2.0);
    const Vec3 r = oracle::random_vec3(g, 1.0);
    ps.items.push_back({m, r});
    total += m;
    moment += m * r;
  }
  const Vec3 com = moment / total;
  for (auto& item : ps.items) item.r -= com;
  return ps;
}

double total_mass(const ParticleSet& ps) {
  double m = 0.0;
  for (const auto& item : ps.items) m += item.mass;
  return m;
}

}  // namespace

TEST_CASE("one-dimensional Euler-Lagrange force") {
  REQUIRE(euler_lagrange_1d(3.0, kGravity, 0.0) ==
          Catch::Approx(3.0 * kGravity).margin(1e-15));
  REQUIRE(euler_lagrange_1d(2.0, kGravity, 1.0) ==
          Catch::Approx(21.62).margin(1e-12));
  REQUIRE(euler_lagrange_1d(5.0, kGravity, -kGravity) == 0.0);
  REQUIRE_THROWS_AS(euler_lagrange_1d(0.0, kGravity, 1.0),
                    InvariantViolation);
}

TEST_CASE("two-link closed forms at special states") {
  const TwoLinkParams p{1.2, 0.7, 2.0, 1.5};

  ArmState s;
  s.theta = VecX::Zero(2);
  s.theta_dot = VecX::Zero(2);
  s.theta_ddot = VecX::Zero(2);
  const TwoLinkTerms straight = two_link_terms(p, s);
  REQUIRE(straight.mass(0, 0) ==
          Catch::Approx(p.m1 * p.l1 * p.l1 + p.m2 * (p.l1 + p.l2) * (p.l1 + p.l2))
              .margin(1e-12));
  REQUIRE(straight.mass(0, 1) ==
          Catch::Approx(p.m2 * (p.l1 * p.l2 + p.l2 * p.l2)).margin(1e-12));
  REQUIRE(straight.velocity.norm() == 0.0);
  REQUIRE(straight.gravity[0] ==
          Catch::Approx((p.m1 + p.m2) * p.l1 * p.g + p.m2 * p.g * p.l2)
              .margin(1e-12));
  REQUIRE(straight.gravity[1] ==
          Catch::Approx(p.m2 * p.g * p.l2).margin(1e-12));

  // Static arm: torque equals the gravity term.
  REQUIRE((two_link_inverse_dynamics(p, s) - straight.gravity).norm() <
          1e-15);

  // No elbow rate: the Coriolis part of the first component vanishes.
  s.theta[1] = 0.7;
  s.theta_dot[0] = 1.3;
  const TwoLinkTerms noelbow = two_link_terms(p, s);
  REQUIRE(noelbow.velocity[0] == 0.0);
  REQUIRE(noelbow.velocity[1] ==
          Catch::Approx(p.m2 * p.l1 * p.l2 * std::sin(0.7) * 1.3 * 1.3)
              .margin(1e-12));

  ArmState bad;
  bad.theta = VecX::Zero(3);
  bad.theta_dot = VecX::Zero(3);
  REQUIRE_THROWS_AS(two_link_terms(p, bad), DimensionMismatch);
}

TEST_CASE("two-link mass matrix is symmetric positive definite") {
  const TwoLinkParams p{0.9, 1.1, 1.7, 0.4};
  auto g = oracle::rng(501);
  for (int rep = 0; rep < 100; ++rep) {
    const ArmState s = random_state(g);
    const TwoLinkTerms t = two_link_terms(p, s);
    REQUIRE(t.mass(0, 1) == t.mass(1, 0));
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(t.mass);
    REQUIRE(eig.eigenvalues()(0) > 0.0);
  }
}

TEST_CASE("two-link inverse and forward dynamics round-trip") {
  const TwoLinkParams p{1.0, 0.8, 1.5, 0.9};
  auto g = oracle::rng(502);
  for (int rep = 0; rep < 50; ++rep) {
    ArmState s = random_state(g);

    // Acceleration chosen to cancel all torques.
    const TwoLinkTerms t = two_link_terms(p, s);
    s.theta_ddot = t.mass.ldlt().solve(VecX(-t.velocity - t.gravity));
    REQUIRE(two_link_inverse_dynamics(p, s).cwiseAbs().maxCoeff() < 1e-12);

    const ArmState r = random_state(g);
    const VecX tau = two_link_inverse_dynamics(p, r);
    const VecX back = two_link_forward_dynamics(p, r.theta, r.theta_dot, tau);
    REQUIRE((back - r.theta_ddot).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("two-link torques match the per-particle Newton assembly") {
  const TwoLinkParams p{1.1, 0.6, 2.2, 0.8};
  auto g = oracle::rng(503);
  for (int rep = 0; rep < 100; ++rep) {
    const ArmState s = random_state(g);
    const VecX lagrange = two_link_inverse_dynamics(p, s);
    const VecX newton = newton_point_mass_torques(p, s);
    REQUIRE((lagrange - newton).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("general mass matrix reduces to the two-link closed form") {
  const TwoLinkParams p{1.3, 0.9, 1.2, 2.1};
  const KinematicChain chain = two_link_chain(p);
  auto g = oracle::rng(504);
  for (int rep = 0; rep < 20; ++rep) {
    const ArmState s = random_state(g);
    const MatX m = mass_matrix_general(chain, s.theta);
    const TwoLinkTerms t = two_link_terms(p, s);
    REQUIRE((m - t.mass).cwiseAbs().maxCoeff() < 1e-12);
  }

  // Single link: the scalar m L^2.
  const KinematicChain one = KinematicChain::from_offsets(
      {{JointKind::revolute, Vec3(0, 0, 1), Transform()}},
      Transform(Rotation(), Vec3(0.75, 0, 0)), {{0.75, 2.0, std::nullopt}},
      Vec3(0, -kGravity, 0));
  const MatX m1 = mass_matrix_general(one, VecX::Zero(1));
  REQUIRE(m1.rows() == 1);
  REQUIRE(m1(0, 0) == Catch::Approx(2.0 * 0.75 * 0.75).margin(1e-12));
}

TEST_CASE("mass model preconditions") {
  const TwoLinkParams p{1.0, 1.0, 1.0, 1.0};
  // Offset chain without link data.
  const KinematicChain bare = KinematicChain::from_offsets(
      {{JointKind::revolute, Vec3(0, 0, 1), Transform()}}, Transform());
  REQUIRE_THROWS_AS(mass_matrix_general(bare, VecX::Zero(1)),
                    MissingMassData);
  // Screw-parameterized chain cannot place the masses.
  const KinematicChain screws = KinematicChain::from_screws(
      {{JointKind::revolute, ScrewAxis(Vec3(0, 0, 1), Vec3::Zero())}},
      Transform(Rotation(), Vec3(1, 0, 0)), {{1.0, 1.0, std::nullopt}});
  REQUIRE_THROWS_AS(mass_matrix_general(screws, VecX::Zero(1)),
                    MissingMassData);
  (void)p;
}

TEST_CASE("christoffel coefficients") {
  // Single revolute joint: constant mass matrix, zero tensor.
  const KinematicChain one = KinematicChain::from_offsets(
      {{JointKind::revolute, Vec3(0, 0, 1), Transform()}},
      Transform(Rotation(), Vec3(0.5, 0, 0)), {{0.5, 1.0, std::nullopt}},
      Vec3(0, -kGravity, 0));
  const auto gamma1 = christoffel(one, VecX::Zero(1));
  REQUIRE(gamma1.size() == 1);
  REQUIRE(std::abs(gamma1[0](0, 0)) < 1e-9);

  const TwoLinkParams p{1.0, 0.8, 1.5, 0.9};
  const KinematicChain chain = two_link_chain(p);
  auto g = oracle::rng(505);
  for (int rep = 0; rep < 10; ++rep) {
    const ArmState s = random_state(g);
    const auto gamma = christoffel(chain, s.theta);
    // Exact (j,k) symmetry by construction.
    for (int i = 0; i < 2; ++i) {
      REQUIRE((gamma[i] - gamma[i].transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    // Velocity-product torques match the closed form.
    const TwoLinkTerms t = two_link_terms(p, s);
    for (int i = 0; i < 2; ++i) {
      const double ci = s.theta_dot.dot(gamma[i] * s.theta_dot);
      REQUIRE(ci == Catch::Approx(t.velocity[i]).margin(1e-6));
    }
  }
}

TEST_CASE("gravity torques from the potential gradient") {
  const TwoLinkParams p{1.2, 0.5, 0.7, 1.9};
  const KinematicChain chain = two_link_chain(p);
  auto g = oracle::rng(506);
  for (int rep = 0; rep < 20; ++rep) {
    const ArmState s = random_state(g);
    const VecX gv = gravity_torque_general(chain, s.theta);
    const TwoLinkTerms t = two_link_terms(p, s);
    REQUIRE((gv - t.gravity).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("general Euler-Lagrange assembly matches the closed form") {
  const TwoLinkParams p{1.0, 0.8, 1.5, 0.9};
  const KinematicChain chain = two_link_chain(p);
  auto g = oracle::rng(507);
  for (int rep = 0; rep < 30; ++rep) {
    const ArmState s = random_state(g);
    const VecX general = euler_lagrange_torque(chain, s);
    const VecX closed = two_link_inverse_dynamics(p, s);
    REQUIRE((general - closed).cwiseAbs().maxCoeff() < 1e-6);

    const VecX qdd =
        forward_dynamics_general(chain, s.theta, s.theta_dot, closed);
    REQUIRE((qdd - s.theta_ddot).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("mass matrix rate obeys the Christoffel skew identity") {
  const TwoLinkParams p{1.0, 0.8, 1.5, 0.9};
  const KinematicChain chain = two_link_chain(p);
  auto g = oracle::rng(508);
  for (int rep = 0; rep < 20; ++rep) {
    const ArmState s = random_state(g);
    const auto gamma = christoffel(chain, s.theta);
    MatX c = MatX::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) c(i, j) += gamma[i](j, k) * s.theta_dot[k];
      }
    }
    const double eps = 1e-6;
    const MatX mdot =
        (mass_matrix_general(chain, VecX(s.theta + eps * s.theta_dot)) -
         mass_matrix_general(chain, VecX(s.theta - eps * s.theta_dot))) /
        (2 * eps);
    const double q = s.theta_dot.dot((mdot - 2.0 * c) * s.theta_dot);
    REQUIRE(std::abs(q) < 1e-6);
  }
}

TEST_CASE("unforced gravity-free rollout conserves kinetic energy") {
  const TwoLinkParams p{1.0, 0.8, 1.5, 0.9, 0.0};  // gravity off
  using Vec4 = Eigen::Vector4d;
  const auto deriv = [&](double, const Vec4& x) {
    const VecX theta = x.head<2>();
    const VecX theta_dot = x.tail<2>();
    const VecX acc =
        two_link_forward_dynamics(p, theta, theta_dot, VecX::Zero(2));
    Vec4 dx;
    dx << theta_dot, acc;
    return dx;
  };
  const auto energy = [&](const Vec4& x) {
    ArmState s;
    s.theta = x.head<2>();
    s.theta_dot = x.tail<2>();
    s.theta_ddot = VecX::Zero(2);
    return 0.5 * s.theta_dot.dot(two_link_terms(p, s).mass * s.theta_dot);
  };

  Vec4 x;
  x << 0.3, -0.8, 1.1, 0.7;
  const double e0 = energy(x);
  double t = 0.0;
  const double h = 1e-4;
  for (int step = 0; step < 10000; ++step) {
    x = oracle::rk4_step<Vec4>(deriv, x, t, h);
    t += h;
  }
  REQUIRE(std::abs(energy(x) - e0) / e0 < 1e-6);
}

TEST_CASE("rotational inertia from particles") {
  ParticleSet pair;
  pair.items = {{1.0, Vec3(1, 0, 0)}, {1.0, Vec3(-1, 0, 0)}};
  const Mat3 i = inertia_from_particles(pair).m();
  REQUIRE((i - Vec3(0, 2, 2).asDiagonal().toDenseMatrix()).norm() < 1e-15);

  ParticleSet origin;
  origin.items = {{3.0, Vec3::Zero()}};
  REQUIRE(inertia_from_particles(origin).m().norm() == 0.0);

  // Entrywise formula oracle.
  auto g = oracle::rng(509);
  for (int rep = 0; rep < 50; ++rep) {
    const ParticleSet ps = random_centered_particles(g, 12);
    const Mat3 hat = inertia_from_particles(ps).m();
    Mat3 direct = Mat3::Zero();
    for (const auto& item : ps.items) {
      const double x = item.r[0], y = item.r[1], z = item.r[2];
      direct(0, 0) += item.mass * (y * y + z * z);
      direct(1, 1) += item.mass * (x * x + z * z);
      direct(2, 2) += item.mass * (x * x + y * y);
      direct(0, 1) -= item.mass * x * y;
      direct(0, 2) -= item.mass * x * z;
      direct(1, 2) -= item.mass * y * z;
    }
    direct(1, 0) = direct(0, 1);
    direct(2, 0) = direct(0, 2);
    direct(2, 1) = direct(1, 2);
    REQUIRE((hat - direct).cwiseAbs().maxCoeff() < 1e-12);
  }

  ParticleSet off;
  off.items = {{1.0, Vec3(0.5, 0, 0)}};
  REQUIRE_THROWS_AS(inertia_from_particles(off), NotCentered);
  ParticleSet negative;
  negative.items = {{-1.0, Vec3::Zero()}};
  REQUIRE_THROWS_AS(inertia_from_particles(negative), InvariantViolation);
}

TEST_CASE("parallel axis shifts") {
  const RotationalInertia zero{};
  REQUIRE((parallel_axis(zero, 2.0, Vec3(0.7, 0, 0)).m() -
           Vec3(0, 2.0 * 0.49, 2.0 * 0.49).asDiagonal().toDenseMatrix())
              .norm() < 1e-15);

  auto g = oracle::rng(510);
  for (int rep = 0; rep < 30; ++rep) {
    const ParticleSet ps = random_centered_particles(g, 10);
    const RotationalInertia ib = inertia_from_particles(ps);
    const double m = total_mass(ps);
    REQUIRE((parallel_axis(ib, m, Vec3::Zero()).m() - ib.m()).norm() <
            1e-15);

    // Brute-force oracle: recompute the particle inertia about the
    // shifted origin (particles sit at r + q there).
    const Vec3 q = oracle::random_vec3(g, 1.0);
    Mat3 direct = Mat3::Zero();
    for (const auto& item : ps.items) {
      const Mat3 rh = hat3(Vec3(item.r + q));
      direct -= item.mass * (rh * rh);
    }
    REQUIRE((parallel_axis(ib, m, q).m() - direct).cwiseAbs().maxCoeff() <
            1e-10);

    // Diagonal entries never shrink under the shift.
    for (int d = 0; d < 3; ++d) {
      REQUIRE(parallel_axis(ib, m, q).m()(d, d) >= ib.m()(d, d) - 1e-15);
    }
  }
}

TEST_CASE("inertia frame changes preserve energy and spectrum") {
  const RotationalInertia diag{Mat3(Vec3(1, 2, 3).asDiagonal())};
  REQUIRE((inertia_change_frame(Rotation(), diag).m() - diag.m()).norm() <
          1e-15);

  // Quarter turn about z swaps the x and y moments.
  const Mat3 swapped = inertia_change_frame(rot_z(M_PI / 2), diag).m();
  REQUIRE(swapped(0, 0) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(swapped(1, 1) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(swapped(2, 2) == Catch::Approx(3.0).margin(1e-12));

  auto g = oracle::rng(511);
  for (int rep = 0; rep < 50; ++rep) {
    const ParticleSet ps = random_centered_particles(g, 8);
    const RotationalInertia ic = inertia_from_particles(ps);
    const Rotation r{oracle::random_rotation(g)};
    const RotationalInertia ia = inertia_change_frame(r, ic);

    const Vec3 wa = oracle::random_vec3(g, 2.0);
    const Vec3 wc = r.matrix() * wa;
    REQUIRE(rotational_ke(ia, wa) ==
            Catch::Approx(rotational_ke(ic, wc)).margin(1e-12));

    Eigen::SelfAdjointEigenSolver<Mat3> ea(ia.m()), ec(ic.m());
    REQUIRE((ea.eigenvalues() - ec.eigenvalues()).cwiseAbs().maxCoeff() <
            1e-10);
  }
}

TEST_CASE("rotational kinetic energy") {
  const RotationalInertia i{Mat3(Vec3(0, 2, 2).asDiagonal())};
  REQUIRE(rotational_ke(i, Vec3::Zero()) == 0.0);
  REQUIRE(rotational_ke(i, Vec3(0, 1, 0)) == Catch::Approx(1.0).margin(1e-15));

  auto g = oracle::rng(512);
  for (int rep = 0; rep < 30; ++rep) {
    const ParticleSet ps = random_centered_particles(g, 15);
    const RotationalInertia ib = inertia_from_particles(ps);
    const Vec3 w = oracle::random_vec3(g, 2.0);
    double brute = 0.0;
    for (const auto& item : ps.items) {
      brute += 0.5 * item.mass * w.cross(item.r).squaredNorm();
    }
    REQUIRE(rotational_ke(ib, w) == Catch::Approx(brute).margin(1e-12));
  }
}

TEST_CASE("spatial inertia and kinetic energy") {
  const RotationalInertia ib{Mat3(Vec3(1, 2, 3).asDiagonal())};
  const SpatialInertia g6(ib, 2.0);
  REQUIRE(spatial_ke(g6, Twist{Vec3::Zero(), Vec3::Zero()}) == 0.0);
  const Twist slide{Vec3::Zero(), Vec3(0.3, -0.4, 1.2)};
  REQUIRE(spatial_ke(g6, slide) ==
          Catch::Approx(0.5 * 2.0 * slide.v.squaredNorm()).margin(1e-14));

  // Pure rotation frame change keeps the mass block scalar.
  const Transform rotated(rot_y(0.6), Vec3::Zero());
  const SpatialInertia gr = spatial_inertia_change_frame(rotated, g6);
  REQUIRE((gr.matrix().bottomRightCorner<3, 3>() - 2.0 * Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-14);
  REQUIRE(gr.matrix().topRightCorner<3, 3>().cwiseAbs().maxCoeff() < 1e-14);

  auto g = oracle::rng(513);
  for (int rep = 0; rep < 40; ++rep) {
    const Transform t(Rotation(oracle::random_rotation(g)),
                      oracle::random_vec3(g, 1.5));
    const SpatialInertia ga = spatial_inertia_change_frame(t, g6);
    REQUIRE((ga.matrix() - ga.matrix().transpose()).cwiseAbs().maxCoeff() <
            1e-12);
    const Twist nua{oracle::random_vec3(g, 1.0), oracle::random_vec3(g, 1.0)};
    const Twist nuc = twist_change_frame(adjoint(t), nua);
    REQUIRE(spatial_ke(ga, nua) ==
            Catch::Approx(spatial_ke(g6, nuc)).margin(1e-10));
  }

  REQUIRE_THROWS_AS(SpatialInertia(ib, 0.0), InvariantViolation);
  Mat6 bad = Mat6::Zero();
  bad(0, 5) = 1.0;
  REQUIRE_THROWS_AS(SpatialInertia::from_matrix(bad, 1.0),
                    InvariantViolation);
}

TEST_CASE("body wrench basics") {
  const RotationalInertia ib{Mat3(Vec3(2, 3, 4).asDiagonal())};
  const SpatialInertia g6(ib, 1.5);

  const Twist zero{Vec3::Zero(), Vec3::Zero()};
  const Wrench w0 = body_wrench(g6, zero, zero);
  REQUIRE(w0.tau.norm() == 0.0);
  REQUIRE(w0.f.norm() == 0.0);

  // Steady spin about a principal axis: no torque, pure convective force.
  const Twist spin{Vec3(0, 0, 1.4), Vec3(0.2, 0, 0)};
  const Wrench ws = body_wrench(g6, spin, zero);
  REQUIRE(ws.tau.norm() < 1e-15);
  REQUIRE((ws.f - 1.5 * spin.w.cross(spin.v)).norm() < 1e-15);
}

TEST_CASE("body wrench matches per-particle sums") {
  auto g = oracle::rng(514);
  for (int rep = 0; rep < 25; ++rep) {
    const ParticleSet ps = random_centered_particles(g, 50);
    const RotationalInertia ib = inertia_from_particles(ps);
    const SpatialInertia gb(ib, total_mass(ps));
    const Twist nu{oracle::random_vec3(g, 1.5), oracle::random_vec3(g, 1.5)};
    const Twist nudot{oracle::random_vec3(g, 2.0), oracle::random_vec3(g, 2.0)};
    const Wrench w = body_wrench(gb, nu, nudot);

    // Each particle needs f_i = m_i a_i; with the body frame at the pose
    // T = identity, a_i = (w^ w^ + wdot^) r_i + w^ v + vdot.
    const Mat3 wh = hat3(nu.w);
    const Mat3 wdh = hat3(nudot.w);
    Vec3 fsum = Vec3::Zero();
    Vec3 tsum = Vec3::Zero();
    for (const auto& item : ps.items) {
      const Vec3 a = (wh * wh + wdh) * item.r + wh * nu.v + nudot.v;
      const Vec3 f = item.mass * a;
      fsum += f;
      tsum += item.r.cross(f);
    }
    REQUIRE((w.f - fsum).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE((w.tau - tsum).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("euler torque and torque-free spin invariants") {
  const RotationalInertia i123{Mat3(Vec3(1, 2, 3).asDiagonal())};
  REQUIRE(euler_torque(i123, Vec3(0, 0, 2), Vec3::Zero()).norm() < 1e-15);
  REQUIRE((euler_torque(i123, Vec3(1, 1, 0), Vec3::Zero()) - Vec3(0, 0, 1))
              .norm() < 1e-15);

  // Unforced rigid-body spin: kinetic energy and the angular momentum norm
  // are both first integrals of the Euler equations.
  const Mat3 imat = Vec3(1, 2, 3).asDiagonal();
  const Mat3 iinv = Vec3(1.0, 0.5, 1.0 / 3.0).asDiagonal();
  const auto deriv = [&](double, const Vec3& w) -> Vec3 {
    return iinv * (-w.cross(imat * w));
  };
  Vec3 w(0.8, -0.5, 1.1);
  const double ke0 = 0.5 * w.dot(imat * w);
  const double mom0 = (imat * w).norm();
  double t = 0.0;
  const double h = 1e-4;
  for (int step = 0; step < 10000; ++step) {
    w = oracle::rk4_step<Vec3>(deriv, w, t, h);
    t += h;
  }
  REQUIRE(std::abs(0.5 * w.dot(imat * w) - ke0) / ke0 < 1e-8);
  REQUIRE(std::abs((imat * w).norm() - mom0) / mom0 < 1e-8);
}

TEST_CASE("nested cross product identity") {
  auto g = oracle::rng(515);
  for (int rep = 0; rep < 200; ++rep) {
    const Vec3 a = oracle::random_vec3(g, 2.0);
    const Vec3 b = oracle::random_vec3(g, 2.0);
    const Vec3 lhs = a.cross(b.cross(a.cross(b)));
    const Vec3 rhs = b.cross(a.cross(a.cross(b)));
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rotational inertia type invariants") {
  Mat3 asym = Mat3::Zero();
  asym(0, 1) = 1.0;
  REQUIRE_THROWS_AS(RotationalInertia(asym), InvariantViolation);

  const Mat3 negative = Vec3(-1, 1, 1).asDiagonal();
  REQUIRE_THROWS_AS(RotationalInertia(negative), InvariantViolation);

  const Mat3 thin = Vec3(1, 1, 5).asDiagonal();
  REQUIRE_THROWS_AS(RotationalInertia(thin), InvariantViolation);

  const Mat3 planar = Vec3(1, 2, 3).asDiagonal();  // boundary: flat body
  REQUIRE_NOTHROW(RotationalInertia(planar));
}
