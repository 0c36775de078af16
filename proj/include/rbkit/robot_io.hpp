#pragma once

// ----------------------------------------------------------------------------
// File formats used by the batch front end.
//
// Robot description (JSON, format_version 1): joints are either all PoE
// style ({type, screw:[w,v]}, world frame at zero configuration) or all
// offset style ({type, axis:[3], offset:[16 row-major]}); home_pose is the
// 4x4 end pose at zero configuration in both styles; optional links carry
// {length, mass}; optional gravity is a 3-vector. Every validation error
// names the offending field.
//
// Motor parameters (JSON) and voltage profiles (CSV with header, zero-order
// hold) feed the motor command.
// ----------------------------------------------------------------------------

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rbkit/chain.hpp"
#include "rbkit/errors.hpp"
#include "rbkit/motor.hpp"
#include "rbkit/se3.hpp"

namespace rbkit {

struct RobotFile {
  std::string name;
  KinematicChain chain;
};

namespace io_detail {

using nlohmann::json;

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline const json& require(const json& obj, const char* key,
                           const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(where + "." + key + ": missing required field");
  }
  return *it;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": expected a number");
  return j.get<double>();
}

inline std::vector<double> number_list(const json& j, std::size_t n,
                                       const std::string& where) {
  if (!j.is_array() || j.size() != n) {
    throw SchemaError(where + ": expected an array of " + std::to_string(n) +
                      " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& v : j) out.push_back(number(v, where));
  return out;
}

inline Vec3 vec3_field(const json& j, const std::string& where) {
  const auto v = number_list(j, 3, where);
  return Vec3(v[0], v[1], v[2]);
}

inline Transform mat4_field(const json& j, const std::string& where) {
  const auto v = number_list(j, 16, where);
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(4 * r + c)];
  }
  try {
    return Transform::from_matrix(m);
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(where + ": " + e.what());
  }
}

inline JointKind kind_field(const json& j, const std::string& where) {
  if (!j.is_string()) throw SchemaError(where + ": expected a string");
  const auto s = j.get<std::string>();
  if (s == "revolute") return JointKind::revolute;
  if (s == "prismatic") return JointKind::prismatic;
  throw SchemaError(where + ": joint type must be revolute or prismatic");
}

}  // namespace io_detail

/// @brief Load and validate a robot description; see the header comment for
/// the format. All errors carry the offending field path.
inline RobotFile load_robot_file(const std::string& path) {
  using io_detail::json;
  const json doc = io_detail::parse_file(path);
  if (!doc.is_object()) throw SchemaError(path + ": expected a JSON object");
  const json& version = io_detail::require(doc, "format_version", path);
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw SchemaError(path + ".format_version: expected 1");
  }

  RobotFile rf;
  if (const auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw SchemaError(path + ".name: expected a string");
    rf.name = it->get<std::string>();
  }

  const json& joints = io_detail::require(doc, "joints", path);
  if (!joints.is_array() || joints.empty()) {
    throw SchemaError(path + ".joints: expected a nonempty array");
  }

  bool any_screw = false, any_offset = false;
  for (std::size_t k = 0; k < joints.size(); ++k) {
    const std::string where = path + ".joints[" + std::to_string(k) + "]";
    const json& j = joints[k];
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    const bool has_screw = j.contains("screw");
    const bool has_axis = j.contains("axis") || j.contains("offset");
    if (has_screw && has_axis) {
      throw SchemaError(where + ": ambiguous mode, give screw or axis/offset");
    }
    if (!has_screw && !has_axis) {
      throw SchemaError(where + ": needs screw or axis plus offset");
    }
    any_screw |= has_screw;
    any_offset |= has_axis;
  }
  if (any_screw && any_offset) {
    throw SchemaError(path + ".joints: all joints must use the same mode");
  }

  const Transform home =
      io_detail::mat4_field(io_detail::require(doc, "home_pose", path),
                            path + ".home_pose");

  std::vector<LinkGeom> links;
  if (const auto it = doc.find("links"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError(path + ".links: expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = path + ".links[" + std::to_string(k) + "]";
      const json& l = (*it)[k];
      if (!l.is_object()) throw SchemaError(where + ": expected an object");
      LinkGeom geom;
      geom.length =
          io_detail::number(io_detail::require(l, "length", where), where + ".length");
      geom.mass =
          io_detail::number(io_detail::require(l, "mass", where), where + ".mass");
      links.push_back(geom);
    }
  }

  Vec3 gravity(0, 0, -9.81);
  if (const auto it = doc.find("gravity"); it != doc.end()) {
    gravity = io_detail::vec3_field(*it, path + ".gravity");
  }

  try {
    if (any_screw) {
      std::vector<std::pair<JointKind, ScrewAxis>> js;
      for (std::size_t k = 0; k < joints.size(); ++k) {
        const std::string where = path + ".joints[" + std::to_string(k) + "]";
        const json& j = joints[k];
        const JointKind kind =
            io_detail::kind_field(io_detail::require(j, "type", where),
                                  where + ".type");
        const auto s = io_detail::number_list(io_detail::require(j, "screw", where),
                                              6, where + ".screw");
        try {
          js.emplace_back(kind, ScrewAxis(Vec3(s[0], s[1], s[2]),
                                          Vec3(s[3], s[4], s[5])));
        } catch (const InvariantViolation& e) {
          throw InvariantViolation(where + ".screw: " + e.what());
        }
      }
      rf.chain = KinematicChain::from_screws(std::move(js), home,
                                             std::move(links), gravity);
    } else {
      std::vector<OffsetJoint> js;
      Transform prefix;
      for (std::size_t k = 0; k < joints.size(); ++k) {
        const std::string where = path + ".joints[" + std::to_string(k) + "]";
        const json& j = joints[k];
        OffsetJoint oj;
        oj.kind = io_detail::kind_field(io_detail::require(j, "type", where),
                                        where + ".type");
        oj.axis = io_detail::vec3_field(io_detail::require(j, "axis", where),
                                        where + ".axis");
        oj.offset =
            io_detail::mat4_field(io_detail::require(j, "offset", where),
                                  where + ".offset");
        prefix = transform_compose(prefix, oj.offset);
        js.push_back(oj);
      }
      // home_pose is the zero-configuration end pose; the fixed transform
      // after the last joint is whatever closes the chain onto it.
      const Transform tail =
          transform_compose(transform_inverse(prefix), home);
      rf.chain = KinematicChain::from_offsets(js, tail, std::move(links),
                                              gravity);
    }
  } catch (const InvariantViolation& e) {
    const std::string what = e.what();
    if (what.find(path) == std::string::npos) {
      throw InvariantViolation(path + ": " + what);
    }
    throw;
  }
  return rf;
}

inline KinematicChain load_robot(const std::string& path) {
  return load_robot_file(path).chain;
}

/// @brief Motor plus gearbox parameters from JSON: scalar fields ka, km,
/// b_m, tau_c_plus, tau_c_minus, inertia_m, optional i_max, and a gearbox
/// object {ratio, b_l, tau_c_l, inertia_l}.
inline std::pair<MotorParams, GearboxParams> load_motor_file(
    const std::string& path) {
  using io_detail::json;
  const json doc = io_detail::parse_file(path);
  if (!doc.is_object()) throw SchemaError(path + ": expected a JSON object");

  MotorParams p;
  p.ka = io_detail::number(io_detail::require(doc, "ka", path), path + ".ka");
  p.km = io_detail::number(io_detail::require(doc, "km", path), path + ".km");
  p.b_m = io_detail::number(io_detail::require(doc, "b_m", path), path + ".b_m");
  p.inertia_m = io_detail::number(io_detail::require(doc, "inertia_m", path),
                                  path + ".inertia_m");
  if (const auto it = doc.find("tau_c_plus"); it != doc.end()) {
    p.tau_c_plus = io_detail::number(*it, path + ".tau_c_plus");
  }
  if (const auto it = doc.find("tau_c_minus"); it != doc.end()) {
    p.tau_c_minus = io_detail::number(*it, path + ".tau_c_minus");
  }
  if (const auto it = doc.find("i_max"); it != doc.end()) {
    p.i_max = io_detail::number(*it, path + ".i_max");
  }

  GearboxParams g;
  if (const auto it = doc.find("gearbox"); it != doc.end()) {
    if (!it->is_object()) {
      throw SchemaError(path + ".gearbox: expected an object");
    }
    const std::string where = path + ".gearbox";
    g.ratio = io_detail::number(io_detail::require(*it, "ratio", where),
                                where + ".ratio");
    if (const auto f = it->find("b_l"); f != it->end()) {
      g.b_l = io_detail::number(*f, where + ".b_l");
    }
    if (const auto f = it->find("tau_c_l"); f != it->end()) {
      g.tau_c_l = io_detail::number(*f, where + ".tau_c_l");
    }
    if (const auto f = it->find("inertia_l"); f != it->end()) {
      g.inertia_l = io_detail::number(*f, where + ".inertia_l");
    }
  }

  try {
    p.validate();
    g.validate();
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(path + ": " + e.what());
  }
  return {p, g};
}

/// @brief Voltage profile from CSV rows "t,u" (header row optional,
/// detected by a non-numeric first field). Sample times must ascend.
inline SampledProfile load_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  SampledProfile profile;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.back() == '\r') {
      if (!line.empty()) line.pop_back();
      if (line.empty()) continue;
    }
    std::istringstream row(line);
    std::string t_str, u_str;
    if (!std::getline(row, t_str, ',') || !std::getline(row, u_str)) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected two comma-separated fields");
    }
    try {
      const double t = std::stod(t_str);
      const double u = std::stod(u_str);
      profile.samples.emplace_back(t, u);
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header row
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected numeric fields");
    }
  }
  for (std::size_t k = 1; k < profile.samples.size(); ++k) {
    if (profile.samples[k].first <= profile.samples[k - 1].first) {
      throw ParseError(path + ": sample times must be strictly increasing");
    }
  }
  return profile;
}

}  // namespace rbkit
