#pragma once

// ----------------------------------------------------------------------------
// Batch command-line front end. run_cli is the whole program: it parses one
// subcommand, runs it against the given streams, and maps errors to exit
// codes (0 ok, 2 bad input, 3 numerical failure, 4 non-convergence under
// --strict). Matrix output uses 17 significant digits so doubles round-trip;
// CSV output uses shortest round-trip formatting. Runs are deterministic:
// identical arguments produce byte-identical output.
// ----------------------------------------------------------------------------

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbkit/chain.hpp"
#include "rbkit/dynamics.hpp"
#include "rbkit/errors.hpp"
#include "rbkit/ik.hpp"
#include "rbkit/motor.hpp"
#include "rbkit/robot_io.hpp"

namespace rbkit {

namespace cli_detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Shortest decimal that parses back to the same double; used for CSV cells.
inline std::string fmt_csv(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline VecX to_vecx(const std::vector<double>& v) {
  VecX out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

// Boundary conversion for --degrees: only revolute coordinates are angles.
inline VecX joint_values(const KinematicChain& chain,
                         const std::vector<double>& v, bool degrees) {
  VecX q = to_vecx(v);
  if (degrees) {
    for (int i = 0; i < q.size() && i < chain.size(); ++i) {
      if (chain.joints()[static_cast<std::size_t>(i)].kind ==
          JointKind::revolute) {
        q[i] *= M_PI / 180.0;
      }
    }
  }
  return q;
}

inline void warn_large_angles(const KinematicChain& chain, const VecX& q,
                              std::ostream& err) {
  for (int i = 0; i < q.size() && i < chain.size(); ++i) {
    if (chain.joints()[static_cast<std::size_t>(i)].kind ==
            JointKind::revolute &&
        std::abs(q[i]) > 2.0 * M_PI) {
      err << "warning: q[" << i << "] = " << fmt17(q[i])
          << " exceeds 2*pi in magnitude\n";
    }
  }
}

inline void print_matrix(std::ostream& out, const MatX& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ' ';
      out << fmt17(m(r, c));
    }
    out << '\n';
  }
}

inline void print_vector(std::ostream& out, const char* label, const VecX& v) {
  out << label << ':';
  for (int i = 0; i < v.size(); ++i) out << ' ' << fmt17(v[i]);
  out << '\n';
}

inline void print_pose(std::ostream& out, const Transform& t) {
  out << "pose:\n";
  print_matrix(out, MatX(t.as_matrix()));
  out << "position: " << fmt17(t.p()[0]) << ' ' << fmt17(t.p()[1]) << ' '
      << fmt17(t.p()[2]) << '\n';
}

inline Transform pose_from_values(const std::vector<double>& v,
                                  const std::string& what) {
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(4 * r + c)];
  }
  try {
    return Transform::from_matrix(m);
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(what + ": " + e.what());
  }
}

inline VecX singular_values(const MatX& m) {
  Eigen::JacobiSVD<MatX> svd(m);
  return svd.singularValues();
}

inline void print_scan_csv(std::ostream& out,
                           const std::vector<SingularityReport>& rows, int n) {
  for (int i = 0; i < n; ++i) out << 'q' << i << ',';
  out << "det,sigma_min,condition,flagged\n";
  for (const auto& r : rows) {
    for (int i = 0; i < n; ++i) out << fmt_csv(r.config[i]) << ',';
    if (r.has_det) out << fmt_csv(r.det);
    out << ',' << fmt_csv(r.sigma_min) << ',' << fmt_csv(r.condition) << ','
        << (r.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace cli_detail

/// @brief Run the command-line tool on already-split arguments (no program
/// name). Writes results to out, warnings and errors to err; returns the
/// process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  namespace cd = cli_detail;

  CLI::App app{"rigid-body kinematics and dynamics toolkit"};
  app.require_subcommand(1);

  std::string robot_path, params_path, profile_path;
  std::vector<double> q_vals, q0_vals, qdot_vals, qddot_vals, tau_vals,
      target_vals;
  std::string method = "poe", frame = "world", direction = "inverse";
  bool degrees = false, strict = false, no_dls = false;
  IkSettings ik_settings;
  int grid = 0, samples = 0;
  unsigned long long seed = 0;
  double dt = 1e-3, tau_d = 0.0;
  int steps = 1000;

  const auto add_robot = [&](CLI::App* cmd) {
    cmd->add_option("file", robot_path, "robot description JSON")->required();
  };
  const auto add_q = [&](CLI::App* cmd) {
    cmd->add_option("--q", q_vals, "joint configuration")
        ->expected(-1)
        ->required();
    cmd->add_flag("--degrees", degrees,
                  "interpret revolute joint values as degrees");
  };

  CLI::App* c_load = app.add_subcommand("load", "validate and summarize a robot file");
  add_robot(c_load);

  CLI::App* c_fk = app.add_subcommand("fk", "forward kinematics");
  add_robot(c_fk);
  add_q(c_fk);
  c_fk->add_option("--method", method, "poe or chain")
      ->check(CLI::IsMember({"poe", "chain"}));

  CLI::App* c_jac = app.add_subcommand("jacobian", "jacobian and singular values");
  add_robot(c_jac);
  add_q(c_jac);
  c_jac->add_option("--frame", frame, "world, body, or position")
      ->check(CLI::IsMember({"world", "body", "position"}));

  CLI::App* c_ik = app.add_subcommand("ik", "iterative inverse kinematics");
  add_robot(c_ik);
  c_ik->add_option("--target", target_vals, "goal pose, 16 values row-major")
      ->expected(16)
      ->required();
  c_ik->add_option("--q0", q0_vals, "initial configuration")->expected(-1);
  c_ik->add_flag("--degrees", degrees,
                 "interpret revolute joint values as degrees");
  c_ik->add_option("--tol", ik_settings.tol, "loss tolerance");
  c_ik->add_option("--max-iters", ik_settings.max_iters, "iteration cap");
  c_ik->add_option("--lambda-step", ik_settings.step_scale, "step scale");
  c_ik->add_option("--lambda-dls", ik_settings.dls_damping, "damping weight");
  c_ik->add_flag("--no-dls", no_dls, "use the plain inverse, error when singular");
  c_ik->add_flag("--adaptive", ik_settings.adaptive_damping,
                 "scale damping by closeness to singularity");
  c_ik->add_flag("--strict", strict, "exit 4 when not converged");

  CLI::App* c_scan = app.add_subcommand("singular-scan",
                                        "sweep configurations, report conditioning");
  add_robot(c_scan);
  c_scan->add_option("--grid", grid, "points per joint over [-pi, pi]");
  c_scan->add_option("--samples", samples, "number of random configurations");
  c_scan->add_option("--seed", seed, "random seed");

  CLI::App* c_dyn = app.add_subcommand("dynamics", "inverse or forward dynamics");
  add_robot(c_dyn);
  add_q(c_dyn);
  c_dyn->add_option("--qdot", qdot_vals, "joint velocities")
      ->expected(-1)
      ->required();
  c_dyn->add_option("--qddot", qddot_vals, "joint accelerations (inverse)")
      ->expected(-1);
  c_dyn->add_option("--tau", tau_vals, "joint torques (forward)")->expected(-1);
  c_dyn->add_option("--direction", direction, "inverse or forward")
      ->check(CLI::IsMember({"inverse", "forward"}));

  CLI::App* c_motor = app.add_subcommand("motor", "simulate a geared dc motor");
  c_motor->add_option("params", params_path, "motor parameter JSON")->required();
  c_motor->add_option("profile", profile_path, "voltage profile CSV")->required();
  c_motor->add_option("--dt", dt, "integration step")->check(CLI::PositiveNumber);
  c_motor->add_option("--steps", steps, "number of steps")
      ->check(CLI::PositiveNumber);
  c_motor->add_option("--tau-d", tau_d, "constant disturbance torque");

  try {
    std::vector<std::string> argv_copy(args);
    std::reverse(argv_copy.begin(), argv_copy.end());
    app.parse(argv_copy);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (app.got_subcommand(c_load)) {
      const RobotFile rf = load_robot_file(robot_path);
      out << "name: " << rf.name << '\n';
      out << "joints: " << rf.chain.size() << '\n';
      out << "parameterization: "
          << (rf.chain.param() == ChainParam::screws ? "screws" : "offsets")
          << '\n';
      for (int i = 0; i < rf.chain.size(); ++i) {
        const auto& j = rf.chain.joints()[static_cast<std::size_t>(i)];
        out << "joint " << i << ": "
            << (j.kind == JointKind::revolute ? "revolute" : "prismatic")
            << '\n';
      }
      out << "home ";
      cd::print_pose(out, rf.chain.home_pose());
      cd::print_vector(out, "gravity", VecX(rf.chain.gravity()));
      return 0;
    }

    if (app.got_subcommand(c_fk)) {
      const RobotFile rf = load_robot_file(robot_path);
      const VecX q = cd::joint_values(rf.chain, q_vals, degrees);
      cd::warn_large_angles(rf.chain, q, err);
      const Transform a = fk_poe(rf.chain, q);
      const Transform b = fk_chain_rule(rf.chain, q);
      if ((a.as_matrix() - b.as_matrix()).cwiseAbs().maxCoeff() > 1e-10) {
        throw NumericalError("fk: product and recursive routes disagree");
      }
      out << "# fk method=" << method << '\n';
      cd::print_pose(out, method == "poe" ? a : b);
      return 0;
    }

    if (app.got_subcommand(c_jac)) {
      const RobotFile rf = load_robot_file(robot_path);
      const VecX q = cd::joint_values(rf.chain, q_vals, degrees);
      cd::warn_large_angles(rf.chain, q, err);
      MatX m;
      if (frame == "world") {
        m = space_jacobian(rf.chain, q).m;
      } else if (frame == "body") {
        m = body_jacobian(rf.chain, q).m;
      } else {
        m = positional_jacobian(rf.chain, q).m;
      }
      out << "# jacobian frame=" << frame << " rows=" << m.rows()
          << " cols=" << m.cols() << '\n';
      cd::print_matrix(out, m);
      const VecX sv = cd::singular_values(m);
      cd::print_vector(out, "singular_values", sv);
      const bool flagged = sv[sv.size() - 1] < 1e-6 * sv[0];
      out << "flagged: " << (flagged ? "true" : "false") << '\n';
      return 0;
    }

    if (app.got_subcommand(c_ik)) {
      const RobotFile rf = load_robot_file(robot_path);
      ik_settings.use_dls = !no_dls;
      const IkGoal goal{cd::pose_from_values(target_vals, "--target")};
      VecX q0 = VecX::Zero(rf.chain.size());
      if (!q0_vals.empty()) q0 = cd::joint_values(rf.chain, q0_vals, degrees);
      const IkResult res = solve_ik(rf.chain, q0, goal, ik_settings);
      out << "converged: " << (res.converged ? "true" : "false") << '\n';
      out << "iters: " << res.iters << '\n';
      out << "final_loss: " << cd::fmt17(res.final_loss) << '\n';
      cd::print_vector(out, "q", res.q);
      VecX trace(static_cast<int>(res.loss_trace.size()));
      for (std::size_t i = 0; i < res.loss_trace.size(); ++i) {
        trace[static_cast<int>(i)] = res.loss_trace[i];
      }
      cd::print_vector(out, "loss_trace", trace);
      if (!res.converged && strict) {
        err << "error: ik did not converge in " << ik_settings.max_iters
            << " iterations\n";
        return 4;
      }
      return 0;
    }

    if (app.got_subcommand(c_scan)) {
      const RobotFile rf = load_robot_file(robot_path);
      if ((grid > 0) == (samples > 0)) {
        throw InputError(
            "singular-scan: give exactly one of --grid or --samples");
      }
      const auto rows =
          grid > 0 ? singularity_scan_grid(rf.chain, grid)
                   : singularity_scan_samples(rf.chain, samples,
                                              static_cast<std::uint64_t>(seed));
      cd::print_scan_csv(out, rows, rf.chain.size());
      return 0;
    }

    if (app.got_subcommand(c_dyn)) {
      const RobotFile rf = load_robot_file(robot_path);
      const VecX q = cd::joint_values(rf.chain, q_vals, degrees);
      cd::warn_large_angles(rf.chain, q, err);
      const VecX qdot = cd::joint_values(rf.chain, qdot_vals, degrees);
      if (qdot.size() != rf.chain.size()) {
        throw DimensionMismatch("dynamics: --qdot length must match joints");
      }
      const MatX m = mass_matrix_general(rf.chain, q);
      const VecX gvec = gravity_torque_general(rf.chain, q);
      ArmState coasting{q, qdot, VecX::Zero(rf.chain.size())};
      const VecX cvec = euler_lagrange_torque(rf.chain, coasting) - gvec;
      out << "mass_matrix:\n";
      cd::print_matrix(out, m);
      cd::print_vector(out, "coriolis", cvec);
      cd::print_vector(out, "gravity", gvec);
      if (direction == "inverse") {
        if (qddot_vals.empty()) {
          throw InputError("dynamics: --direction=inverse needs --qddot");
        }
        const VecX qddot = cd::joint_values(rf.chain, qddot_vals, degrees);
        if (qddot.size() != rf.chain.size()) {
          throw DimensionMismatch("dynamics: --qddot length must match joints");
        }
        cd::print_vector(out, "tau",
                         euler_lagrange_torque(rf.chain, {q, qdot, qddot}));
      } else {
        if (tau_vals.empty()) {
          throw InputError("dynamics: --direction=forward needs --tau");
        }
        const VecX tau = cd::to_vecx(tau_vals);
        if (tau.size() != rf.chain.size()) {
          throw DimensionMismatch("dynamics: --tau length must match joints");
        }
        cd::print_vector(out, "qddot",
                         forward_dynamics_general(rf.chain, q, qdot, tau));
      }
      return 0;
    }

    if (app.got_subcommand(c_motor)) {
      const auto [mp, gp] = load_motor_file(params_path);
      const SampledProfile u = load_profile_csv(profile_path);
      const auto traj = simulate_motor(mp, gp, u, MotorState{}, dt, steps, tau_d);
      out << "t,theta,omega\n";
      for (const auto& s : traj) {
        out << cd::fmt_csv(s.t) << ',' << cd::fmt_csv(s.theta) << ','
            << cd::fmt_csv(s.omega) << '\n';
      }
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace rbkit
