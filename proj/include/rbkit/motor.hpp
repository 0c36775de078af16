#pragma once

// ----------------------------------------------------------------------------
// Scalar DC-motor joint model: linear driver and torque maps, viscous plus
// Coulomb friction, gearbox reflection of load-side quantities, the torque
// balance on the motor shaft, and a fixed-step simulation.
//
// All state is motor-side; load-side parameters enter the balance divided by
// the gear ratio (rates, torques) or its square (damping, inertia).
// ----------------------------------------------------------------------------

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rbkit/errors.hpp"

namespace rbkit {

struct MotorParams {
  double ka;        // driver gain, A/V
  double km;        // torque constant, N*m/A
  double b_m;       // motor-side viscous coefficient, N*m*s/rad
  double tau_c_plus = 0.0;   // Coulomb level for positive rotation, >= 0
  double tau_c_minus = 0.0;  // Coulomb level for negative rotation, <= 0
  double inertia_m;          // rotor inertia, kg*m^2
  std::optional<double> i_max;  // optional driver saturation, A

  void validate() const {
    if (!(ka > 0.0 && km > 0.0 && b_m > 0.0 && inertia_m > 0.0)) {
      throw InvariantViolation("motor gains, damping and inertia must be positive");
    }
    if (tau_c_plus < 0.0 || tau_c_minus > 0.0) {
      throw InvariantViolation("Coulomb levels must satisfy tau_c+ >= 0 >= tau_c-");
    }
    if (i_max && !(*i_max > 0.0)) {
      throw InvariantViolation("current limit must be positive when set");
    }
  }
};

struct GearboxParams {
  double ratio = 1.0;      // G, motor turns per load turn
  double b_l = 0.0;        // load-side viscous coefficient
  double tau_c_l = 0.0;    // load-side Coulomb level, symmetric, >= 0
  double inertia_l = 0.0;  // load-side inertia

  void validate() const {
    if (!(ratio > 0.0)) throw InvariantViolation("gear ratio must be positive");
    if (b_l < 0.0 || tau_c_l < 0.0 || inertia_l < 0.0) {
      throw InvariantViolation("load-side quantities must be nonnegative");
    }
  }
};

struct MotorState {
  double omega = 0.0;  // motor-side rad/s
  double theta = 0.0;  // motor-side rad
  double t = 0.0;      // s
};

// Load quantities as seen through the gearbox: damping and inertia scale by
// G^2, torque levels by G.
struct ReflectedLoad {
  double b;
  double tau_c;
  double inertia;
};

// Piecewise-constant voltage profile: the value at t is the sample at the
// greatest time <= t (zero-order hold), and 0 before the first sample.
struct SampledProfile {
  std::vector<std::pair<double, double>> samples;  // (time, volts), ascending

  [[nodiscard]] double at(double t) const {
    double u = 0.0;
    for (const auto& [ts, us] : samples) {
      if (ts > t) break;
      u = us;
    }
    return u;
  }

  static SampledProfile constant(double u) { return {{{0.0, u}}}; }
};

/// @brief Driver output current i = ka u, clamped to the limit when set.
[[nodiscard]] inline double driver_current(const MotorParams& p, double u) {
  const double i = p.ka * u;
  if (p.i_max) return std::clamp(i, -*p.i_max, *p.i_max);
  return i;
}

/// @brief Motor torque tau = km i.
[[nodiscard]] inline double motor_torque(const MotorParams& p, double i) {
  return p.km * i;
}

/// @brief Motor-side friction torque b w plus the direction-selected Coulomb
/// level; exactly zero at w = 0.
[[nodiscard]] inline double friction_torque(const MotorParams& p,
                                            double omega) {
  double coulomb = 0.0;
  if (omega > 0.0) coulomb = p.tau_c_plus;
  if (omega < 0.0) coulomb = p.tau_c_minus;
  return p.b_m * omega + coulomb;
}

/// @brief Load-side quantities reflected through the gearbox:
/// b G^2, tau_c G, I G^2.
[[nodiscard]] inline ReflectedLoad reflect_load(const GearboxParams& g) {
  g.validate();
  return {g.b_l * g.ratio * g.ratio, g.tau_c_l * g.ratio,
          g.inertia_l * g.ratio * g.ratio};
}

/// @brief A load-side rate seen from the motor shaft: w_l / G.
[[nodiscard]] inline double reflect_rate(const GearboxParams& g,
                                         double omega_l) {
  return omega_l / g.ratio;
}

/// @brief A load-side torque seen from the motor shaft: tau_l G.
[[nodiscard]] inline double reflect_torque(const GearboxParams& g,
                                           double tau_l) {
  return tau_l * g.ratio;
}

namespace detail {

// Total Coulomb level (motor side plus reflected load side) for a given
// rotation direction; 0 for the rest direction.
inline double coulomb_level(const MotorParams& p, const GearboxParams& g,
                            double direction) {
  if (direction > 0.0) return p.tau_c_plus + g.tau_c_l / g.ratio;
  if (direction < 0.0) return p.tau_c_minus - g.tau_c_l / g.ratio;
  return 0.0;
}

}  // namespace detail

/// @brief Acceleration of the motor shaft from the torque balance
/// km ka u - (b_m + b_l/G^2) w - coulomb(w) - tau_d/G = (I_m + I_l/G^2) wdot.
[[nodiscard]] inline double shaft_acceleration(const MotorParams& p,
                                               const GearboxParams& g,
                                               double u, double omega,
                                               double tau_d = 0.0) {
  p.validate();
  g.validate();
  const double inertia = p.inertia_m + g.inertia_l / (g.ratio * g.ratio);
  const double viscous = (p.b_m + g.b_l / (g.ratio * g.ratio)) * omega;
  const double coulomb = detail::coulomb_level(p, g, omega);
  const double drive = motor_torque(p, driver_current(p, u));
  return (drive - viscous - coulomb - tau_d / g.ratio) / inertia;
}

/// @brief Fixed-step RK4 simulation of (theta, omega) under the shaft torque
/// balance. The Coulomb direction is frozen across each step's sub-stages,
/// with |w| < 1e-9 treated as rest; a rest state holds (stiction) while the
/// net applied torque stays within the Coulomb level. Returns steps+1 states
/// starting with state0.
[[nodiscard]] inline std::vector<MotorState> simulate_motor(
    const MotorParams& p, const GearboxParams& g, const SampledProfile& u,
    const MotorState& state0, double dt, int steps, double tau_d = 0.0) {
  p.validate();
  g.validate();
  if (!(dt > 0.0)) throw InvariantViolation("time step must be positive");
  if (steps < 0) throw InvariantViolation("step count must be nonnegative");

  const double inertia = p.inertia_m + g.inertia_l / (g.ratio * g.ratio);
  const double b_eff = p.b_m + g.b_l / (g.ratio * g.ratio);
  constexpr double kRestBand = 1e-9;

  std::vector<MotorState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(state0);
  MotorState s = state0;

  for (int k = 0; k < steps; ++k) {
    const double applied0 =
        motor_torque(p, driver_current(p, u.at(s.t))) - tau_d / g.ratio;
    const bool at_rest = std::abs(s.omega) < kRestBand;
    if (at_rest) {
      const double level = std::abs(detail::coulomb_level(
          p, g, applied0 >= 0.0 ? 1.0 : -1.0));
      if (std::abs(applied0) <= level) {
        s.omega = 0.0;
        s.t = state0.t + (k + 1) * dt;
        out.push_back(s);
        continue;
      }
    }

    const double direction = at_rest ? (applied0 > 0.0 ? 1.0 : -1.0)
                                     : (s.omega > 0.0 ? 1.0 : -1.0);
    const double coulomb = detail::coulomb_level(p, g, direction);
    const auto accel = [&](double t, double omega) {
      const double drive = motor_torque(p, driver_current(p, u.at(t)));
      return (drive - b_eff * omega - coulomb - tau_d / g.ratio) / inertia;
    };

    const double w1 = s.omega;
    const double a1 = accel(s.t, w1);
    const double w2 = s.omega + 0.5 * dt * a1;
    const double a2 = accel(s.t + 0.5 * dt, w2);
    const double w3 = s.omega + 0.5 * dt * a2;
    const double a3 = accel(s.t + 0.5 * dt, w3);
    const double w4 = s.omega + dt * a3;
    const double a4 = accel(s.t + dt, w4);

    s.theta += dt / 6.0 * (w1 + 2 * w2 + 2 * w3 + w4);
    s.omega += dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    s.t = state0.t + (k + 1) * dt;
    out.push_back(s);
  }
  return out;
}

}  // namespace rbkit
