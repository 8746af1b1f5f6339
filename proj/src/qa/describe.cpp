#include "forge/qa/qa.hpp"

#include "forge/dsl/registry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

// Scene narration. One template per entity kind plus one per connection
// mode; every numeric parameter value is spelled out so that questions are
// self-contained. A masked parameter prints as "x".

namespace forge::qa {

namespace {

using dsl::EntitySpec;
using dsl::ParamPath;

class Narrator {
 public:
  Narrator(const EntitySpec& e,
           const std::map<std::string, std::string>& replacements)
      : e_(e), replacements_(replacements) {}

  std::string val(const std::string& field, int index = -1,
                  const std::string& unit = "") const {
    ParamPath path{e_.name, field, index};
    auto it = replacements_.find(path.str());
    if (it != replacements_.end()) return it->second;
    const auto& p = e_.params.at(field);
    double v = index < 0 ? p.number() : p.list()[index];
    std::string s = format_double(v);
    if (!unit.empty()) s += " " + unit;
    return s;
  }

  std::string list(const std::string& field, const std::string& unit) const {
    const auto& xs = e_.params.at(field).list();
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ", ";
      out += val(field, static_cast<int>(i));
    }
    if (!unit.empty()) out += " " + unit;
    return out;
  }

  std::string angle(const std::string& field) const {
    ParamPath path{e_.name, field, -1};
    if (replacements_.count(path.str())) {
      return replacements_.at(path.str()) + " rad";
    }
    std::string raw = val(field, -1);
    double v = e_.params.at(field).number();
    std::ostringstream os;
    os << raw << " rad (" << format_double(std::round(v * 1800.0 / std::numbers::pi) / 10.0)
       << " deg)";
    return os.str();
  }

  double num(const std::string& field) const {
    return e_.params.at(field).number();
  }
  bool has(const std::string& field) const {
    return e_.params.count(field) > 0;
  }
  const std::string& str(const std::string& field) const {
    return e_.params.at(field).str();
  }

 private:
  const EntitySpec& e_;
  const std::map<std::string, std::string>& replacements_;
};

std::string describe_entity(const EntitySpec& e,
                            const std::map<std::string, std::string>& repl) {
  Narrator n(e, repl);
  std::ostringstream os;
  const std::string& id = e.name;
  switch (e.kind) {
    case dsl::EntityKind::kMassWithFixedPulley: {
      const std::string& type = n.str("mass_type");
      os << "Assembly '" << id << "' is a fixed, frictionless pulley (wheel mass "
         << n.val("pulley_mass", -1, "kg") << ").";
      if (type == "Mass") {
        os << " A light cable over the pulley carries a block of mass "
           << n.val("mass_values", 0, "kg") << " ('" << id
           << "/mass_0'); the other cable end is " << id
           << "'s open connection.";
      } else if (type == "MassChain") {
        os << " A light cable over the pulley carries a vertical chain of "
              "blocks of masses "
           << n.list("mass_values", "kg") << " ('" << id << "/mass_0' on top)"
           << ", linked by short strings; the other cable end is " << id
           << "'s open connection.";
      } else {
        os << " A light cable over the pulley ends in a spring (stiffness "
           << n.val("spring_constant", -1, "N/m") << ", natural length "
           << n.val("spring_natural_length", -1, "m")
           << ") from which a block of mass " << n.val("mass_values", 0, "kg")
           << " ('" << id << "/mass_0') hangs, initially at the spring's "
           << "natural length; the other cable end is " << id
           << "'s open connection.";
      }
      break;
    }
    case dsl::EntityKind::kMassWithMovablePulley:
      os << "Assembly '" << id
         << "' consists of two fixed pulleys with suspended blocks of masses "
         << n.val("mass_values", 0, "kg") << " ('" << id << "/mass_a') and "
         << n.val("mass_values", 1, "kg") << " ('" << id
         << "/mass_b'); the cable between them wraps over a movable pulley "
            "of mass "
         << n.val("pulley_mass", -1, "kg") << " ('" << id
         << "/movable_pulley') whose top is " << id << "'s open connection.";
      break;
    case dsl::EntityKind::kMassWithReverseMovablePulley:
      os << "Assembly '" << id
         << "' consists of two fixed pulleys with suspended blocks of masses "
         << n.val("mass_values", 0, "kg") << " ('" << id << "/mass_a') and "
         << n.val("mass_values", 1, "kg") << " ('" << id
         << "/mass_b'); the cable between them passes under a movable pulley "
            "of mass "
         << n.val("pulley_mass", -1, "kg") << " ('" << id
         << "/movable_pulley') from which a load may hang at " << id
         << "'s open connection.";
      break;
    case dsl::EntityKind::kTwoSideMassPlane:
      os << "Assembly '" << id << "' is a fixed incline of angle "
         << n.angle("incline_angle") << " and face length "
         << n.val("face_length", -1, "m") << " carrying a block of mass "
         << n.val("mass", -1, "kg") << " ('" << id
         << "/block') at mid-face, coefficient of friction "
         << n.val("friction_coefficient") << ".";
      if (n.num("initial_velocity") != 0.0) {
        os << " The block starts moving along the face at "
           << n.val("initial_velocity", -1, "m/s") << " (uphill positive).";
      }
      break;
    case dsl::EntityKind::kStackedMassPlane: {
      os << "Assembly '" << id
         << "' is a horizontal plane carrying a stack of blocks of masses "
         << n.list("masses", "kg") << " (bottom block '" << id
         << "/block_0' first), each " << n.val("block_length", -1, "m")
         << " long; the friction coefficients under each block "
            "(ground first) are "
         << n.list("friction_coefficients", "") << ".";
      const auto& v0 = e.params.at("initial_velocities").list();
      for (std::size_t i = 0; i < v0.size(); ++i) {
        if (v0[i] != 0.0) {
          os << " Block '" << id << "/block_" << i
             << "' starts sliding at " << n.val("initial_velocities",
                                                static_cast<int>(i), "m/s")
             << ".";
        }
      }
      break;
    }
    case dsl::EntityKind::kDirectedMass:
      os << "Assembly '" << id << "' is a block of mass "
         << n.val("mass", -1, "kg") << " ('" << id
         << "/block') suspended from two fixed pulleys; the far cable ends "
            "are "
         << id << "'s open connections.";
      break;
    case dsl::EntityKind::kMassPrismPlane: {
      os << "Assembly '" << id
         << "' is a triangular wedge free to slide on a frictionless floor, "
            "mass "
         << n.val("wedge_mass", -1, "kg") << " ('" << id
         << "/wedge'), left face angle " << n.angle("left_angle")
         << ", right face angle " << n.angle("right_angle") << ".";
      bool left = n.has("left_mass"), right = n.has("right_mass");
      if (left) {
        os << " A block of mass " << n.val("left_mass", -1, "kg") << " ('"
           << id << "/block_left') rests on the left face.";
      }
      if (right) {
        os << " A block of mass " << n.val("right_mass", -1, "kg") << " ('"
           << id << "/block_right') rests on the right face.";
      }
      if (left && right) {
        os << " The two blocks are joined by a light string over the apex.";
      }
      os << " The block-face friction coefficient is "
         << n.val("friction_coefficient") << ".";
      break;
    }
    case dsl::EntityKind::kMassBoxPlane:
      os << "Assembly '" << id << "' is a large block of mass "
         << n.val("box_mass", -1, "kg") << " ('" << id
         << "/box') free to slide on a frictionless floor. A block of mass "
         << n.val("top_mass", -1, "kg") << " ('" << id
         << "/top_block') rests on its top (friction coefficient "
         << n.val("friction_coefficient")
         << ") and is joined by a light string over a corner guide to a "
            "block of mass "
         << n.val("side_mass", -1, "kg") << " ('" << id
         << "/side_block') hanging against the vertical face.";
      break;
    case dsl::EntityKind::kTwoDCollisionPlane: {
      const auto& ms = e.params.at("masses").list();
      os << "Assembly '" << id
         << "' is a frictionless horizontal plane with " << ms.size()
         << " sliding balls: ";
      const auto& pos = e.params.at("initial_positions").list();
      const auto& vel = e.params.at("initial_velocities").list();
      for (std::size_t i = 0; i < ms.size(); ++i) {
        if (i) os << "; ";
        os << "ball '" << id << "/ball_" << i << "' of mass "
           << n.val("masses", static_cast<int>(i), "kg") << " and radius "
           << n.val("radii", static_cast<int>(i), "m") << " starting at ("
           << format_double(pos[2 * i]) << ", " << format_double(pos[2 * i + 1])
           << ") m with velocity (" << format_double(vel[2 * i]) << ", "
           << format_double(vel[2 * i + 1]) << ") m/s";
      }
      os << ". Collisions have coefficient of restitution "
         << n.val("restitution") << ".";
      break;
    }
    case dsl::EntityKind::kComplexCollisionPlane: {
      os << "Assembly '" << id
         << "' is a frictionless 1D bench (motion along x) with objects, "
            "left to right: ";
      std::istringstream types(n.str("object_types"));
      std::string t;
      const auto& pos = e.params.at("initial_positions").list();
      std::size_t i = 0;
      while (types >> t) {
        if (i) os << "; ";
        os << "a " << (t == "spring_block" ? "block with a spring bumper" : t)
           << " '" << id << "/" << t << "_" << i << "' at x = "
           << format_double(pos[i]) << " m, mass "
           << n.val("masses", static_cast<int>(i), "kg") << ", velocity "
           << n.val("initial_velocities", static_cast<int>(i), "m/s");
        if (t == "spring_block") {
          os << ", spring stiffness "
             << n.val("spring_constants", static_cast<int>(i), "N/m");
        }
        ++i;
      }
      os << ". Impulsive collisions have coefficient of restitution "
         << n.val("restitution") << ".";
      break;
    }
    case dsl::EntityKind::kSolarSystem: {
      const auto& ms = e.params.at("planet_masses").list();
      os << "Assembly '" << id << "' is a stationary star of mass "
         << n.val("star_mass", -1, "kg") << " ('" << id << "/star') with "
         << ms.size() << " orbiting planet" << (ms.size() > 1 ? "s" : "")
         << ": ";
      for (std::size_t i = 0; i < ms.size(); ++i) {
        if (i) os << "; ";
        os << "planet '" << id << "/planet_" << i << "' of mass "
           << n.val("planet_masses", static_cast<int>(i), "kg")
           << " starting at orbital radius "
           << n.val("orbit_radii", static_cast<int>(i), "m")
           << " at " << n.val("speed_factors", static_cast<int>(i))
           << " times the local circular speed";
      }
      os << ". Only gravity acts.";
      break;
    }
    case dsl::EntityKind::kRocketEntity:
      os << "Assembly '" << id << "' is a rocket ('" << id
         << "/rocket') of initial mass " << n.val("initial_mass", -1, "kg")
         << " and dry mass " << n.val("dry_mass", -1, "kg")
         << " launching vertically from the surface of a planet of mass "
         << n.val("planet_mass", -1, "kg") << " and radius "
         << n.val("planet_radius", -1, "m") << ". It burns fuel at "
         << n.val("burn_rate", -1, "kg/s") << " with exhaust speed "
         << n.val("exhaust_speed", -1, "m/s")
         << " until the dry mass is reached.";
      break;
    case dsl::EntityKind::kRotationEntity: {
      os << "Assembly '" << id
         << "' is a rigid pendulum swinging about a fixed pivot, made of: ";
      std::istringstream types(n.str("shape_types"));
      std::string t;
      std::size_t i = 0;
      while (types >> t) {
        if (i) os << "; ";
        os << "a " << t << " '" << id << "/" << t << "_" << i << "' of mass "
           << n.val("shape_masses", static_cast<int>(i), "kg") << " and "
           << (t == "bar" ? "length " : "radius ")
           << n.val("shape_sizes", static_cast<int>(i), "m")
           << " centered " << n.val("shape_offsets", static_cast<int>(i), "m")
           << " from the pivot";
        ++i;
      }
      os << ". It is released at " << n.val("initial_angle", -1, "rad")
         << " from the downward vertical with angular velocity "
         << n.val("initial_angular_velocity", -1, "rad/s") << ".";
      break;
    }
    case dsl::EntityKind::kRollingEntity:
      os << "Assembly '" << id << "' is a " << n.str("shape_type") << " ('"
         << id << "/roller') of mass " << n.val("mass", -1, "kg")
         << " and radius " << n.val("radius", -1, "m");
      if (n.has("inner_radius")) {
        os << " (inner radius " << n.val("inner_radius", -1, "m") << ")";
      }
      os << " rolling without slipping from the top of an incline of angle "
         << n.angle("incline_angle") << " and length "
         << n.val("incline_length", -1, "m") << ".";
      break;
    case dsl::EntityKind::kEmEntity: {
      const auto& E = e.params.at("electric_field").list();
      const auto& B = e.params.at("magnetic_field").list();
      const auto& v0 = e.params.at("initial_velocity").list();
      os << "Assembly '" << id << "' is a particle ('" << id
         << "/particle') of mass " << n.val("mass", -1, "kg") << " and charge "
         << n.val("charge", -1, "C") << " with initial velocity ("
         << n.val("initial_velocity", 0) << ", " << n.val("initial_velocity", 1)
         << ", " << n.val("initial_velocity", 2) << ") m/s";
      bool has_E = E[0] != 0 || E[1] != 0 || E[2] != 0;
      bool has_B = B[0] != 0 || B[1] != 0 || B[2] != 0;
      if (has_E) {
        os << " in a uniform electric field (" << n.val("electric_field", 0)
           << ", " << n.val("electric_field", 1) << ", "
           << n.val("electric_field", 2) << ") V/m";
      }
      if (has_B) {
        os << (has_E ? " and" : " in") << " a uniform magnetic field ("
           << n.val("magnetic_field", 0) << ", " << n.val("magnetic_field", 1)
           << ", " << n.val("magnetic_field", 2) << ") T";
      }
      const std::string& grav = n.str("gravity");
      bool g_on = grav == "on" || (grav == "auto" && n.num("charge") == 0.0);
      os << (g_on ? ". Gravity acts on the particle." : ". Gravity is negligible.");
      (void)v0;
      break;
    }
  }
  return os.str();
}

}  // namespace

std::string describe_scene(const dsl::SceneSpec& scene,
                           const std::map<std::string, std::string>& repl) {
  std::ostringstream os;
  double g = scene.g();
  os << "Take g = " << format_double(g) << " m/s^2.";
  for (const auto& e : scene.entities) {
    os << " " << describe_entity(e, repl);
  }
  for (const auto& c : scene.connections) {
    os << " A taut cable ties '" << c.a.entity << "' (" << c.a.port
       << ") to '" << c.b.entity << "' (" << c.b.port << ").";
  }
  return os.str();
}

std::string describe_scene(const dsl::SceneSpec& scene,
                           const std::optional<dsl::ParamPath>& masked) {
  std::map<std::string, std::string> repl;
  if (masked) repl[masked->str()] = "x";
  return describe_scene(scene, repl);
}

}  // namespace forge::qa
