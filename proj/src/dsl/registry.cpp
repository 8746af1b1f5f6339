#include "forge/dsl/registry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace forge::dsl {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

[[noreturn]] void fail(const EntitySpec& e, const std::string& msg) {
  throw ValidationError("entity '" + e.name + "' (" + to_string(e.kind) +
                        "): " + msg);
}

double num(const EntitySpec& e, const std::string& key) {
  auto it = e.params.find(key);
  if (it == e.params.end() || !it->second.is_number()) {
    fail(e, "missing numeric parameter '" + key + "'");
  }
  return it->second.number();
}

const std::vector<double>& list(const EntitySpec& e, const std::string& key) {
  auto it = e.params.find(key);
  if (it == e.params.end() || !it->second.is_list()) {
    fail(e, "missing list parameter '" + key + "'");
  }
  return it->second.list();
}

const std::string& str(const EntitySpec& e, const std::string& key) {
  auto it = e.params.find(key);
  if (it == e.params.end() || !it->second.is_string()) {
    fail(e, "missing string parameter '" + key + "'");
  }
  return it->second.str();
}

bool has(const EntitySpec& e, const std::string& key) {
  return e.params.count(key) > 0;
}

void require_positive(const EntitySpec& e, const std::string& key) {
  if (num(e, key) <= 0.0) fail(e, "parameter '" + key + "' must be > 0");
}

void require_nonnegative(const EntitySpec& e, const std::string& key) {
  if (num(e, key) < 0.0) fail(e, "parameter '" + key + "' must be >= 0");
}

void require_angle(const EntitySpec& e, const std::string& key) {
  double a = num(e, key);
  if (!(a > 0.0 && a < kHalfPi)) {
    fail(e, "parameter '" + key + "' must be an incline angle in (0, pi/2)");
  }
}

void require_positive_list(const EntitySpec& e, const std::string& key,
                           std::size_t min_size = 1) {
  const auto& v = list(e, key);
  if (v.size() < min_size) {
    fail(e, "parameter '" + key + "' needs at least " +
                std::to_string(min_size) + " entries");
  }
  for (double x : v) {
    if (x <= 0.0) fail(e, "entries of '" + key + "' must be > 0");
  }
}

void require_list_size(const EntitySpec& e, const std::string& key,
                       std::size_t size) {
  if (list(e, key).size() != size) {
    fail(e, "parameter '" + key + "' must have exactly " +
                std::to_string(size) + " entries");
  }
}

// Adaptive default: ensure list `key` exists with `n` copies of `fill`.
void default_list(EntitySpec& e, const std::string& key, std::size_t n,
                  double fill) {
  if (!has(e, key)) {
    e.params[key] = ParamValue(std::vector<double>(n, fill));
  }
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == ',' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

ParamField number_field(std::string name, bool required,
                        std::optional<double> def = std::nullopt) {
  ParamField f;
  f.name = std::move(name);
  f.type = FieldType::kNumber;
  f.required = required;
  if (def) f.default_value = ParamValue(*def);
  return f;
}

ParamField list_field(std::string name, bool required = true) {
  ParamField f;
  f.name = std::move(name);
  f.type = FieldType::kList;
  f.required = required;
  return f;
}

ParamField string_field(std::string name, bool required,
                        std::optional<std::string> def = std::nullopt) {
  ParamField f;
  f.name = std::move(name);
  f.type = FieldType::kString;
  f.required = required;
  if (def) f.default_value = ParamValue(std::move(*def));
  return f;
}

BodySpec body(std::string name, BodyKind kind, ParamMap params) {
  return BodySpec{std::move(name), kind, std::move(params)};
}

// ---------------------------------------------------------------------------
// Per-kind templates
// ---------------------------------------------------------------------------

EntityInfo make_mass_with_fixed_pulley() {
  EntityInfo info;
  info.kind = EntityKind::kMassWithFixedPulley;
  info.dsl_name = "MassWithFixedPulley";
  info.snake_name = "mass_with_fixed_pulley";
  info.fields = {
      string_field("mass_type", false, "Mass"),
      list_field("mass_values"),
      number_field("pulley_mass", false, 1.0),
      number_field("spring_constant", false, 100.0),
      number_field("spring_natural_length", false, 0.5),
      number_field("hang_depth", false, 1.0),
  };
  info.ports = {{"cable_end", PortType::kCableEnd}};
  info.validate = [](EntitySpec& e) {
    const std::string& t = str(e, "mass_type");
    if (t != "Mass" && t != "MassChain" && t != "SpringMass") {
      fail(e, "mass_type must be Mass, MassChain or SpringMass");
    }
    require_positive_list(e, "mass_values", t == "MassChain" ? 2 : 1);
    if (t != "MassChain" && list(e, "mass_values").size() != 1) {
      fail(e, "mass_values must hold exactly one mass for mass_type " + t);
    }
    require_positive(e, "pulley_mass");
    require_positive(e, "spring_constant");
    require_positive(e, "spring_natural_length");
    require_positive(e, "hang_depth");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("pulley", BodyKind::kPulley,
                       {{"m", num(e, "pulley_mass")}}));
    const auto& ms = list(e, "mass_values");
    if (str(e, "mass_type") == "SpringMass") {
      out.push_back(body("mass_0", BodyKind::kSpringMassSystem,
                         {{"k", std::vector<double>{num(e, "spring_constant")}},
                          {"l0", std::vector<double>{
                                     num(e, "spring_natural_length")}},
                          {"x", std::vector<double>{0.0}},
                          {"m", std::vector<double>{ms[0]}}}));
    } else {
      for (std::size_t i = 0; i < ms.size(); ++i) {
        out.push_back(body("mass_" + std::to_string(i), BodyKind::kMass,
                           {{"m", ms[i]}}));
      }
    }
    return out;
  };
  info.maskable = {
      {"mass_values", 0, "the mass of the suspended block", "kg"},
      {"spring_constant", -1, "the spring constant", "N/m"},
  };
  return info;
}

EntityInfo make_movable_pulley(EntityKind kind, bool reverse) {
  EntityInfo info;
  info.kind = kind;
  info.dsl_name =
      reverse ? "MassWithReverseMovablePulley" : "MassWithMovablePulley";
  info.snake_name = reverse ? "mass_with_reverse_movable_pulley"
                            : "mass_with_movable_pulley";
  info.fields = {
      list_field("mass_values", false),
      number_field("pulley_mass", false, 1.0),
      number_field("hang_depth", false, 1.0),
  };
  info.ports = {{reverse ? "load" : "top", PortType::kAttach}};
  info.validate = [](EntitySpec& e) {
    if (!has(e, "mass_values")) {
      e.params["mass_values"] = ParamValue(std::vector<double>{1.0, 1.0});
    }
    require_positive_list(e, "mass_values", 2);
    require_list_size(e, "mass_values", 2);
    require_positive(e, "pulley_mass");
    require_positive(e, "hang_depth");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    const auto& ms = list(e, "mass_values");
    return std::vector<BodySpec>{
        body("fixed_pulley_a", BodyKind::kPulley, {{"m", 1.0}}),
        body("fixed_pulley_b", BodyKind::kPulley, {{"m", 1.0}}),
        body("movable_pulley", BodyKind::kPulley,
             {{"m", num(e, "pulley_mass")}}),
        body("mass_a", BodyKind::kMass, {{"m", ms[0]}}),
        body("mass_b", BodyKind::kMass, {{"m", ms[1]}}),
    };
  };
  info.maskable = {
      {"mass_values", 0, "the mass of the first suspended block", "kg"},
      {"mass_values", 1, "the mass of the second suspended block", "kg"},
      {"pulley_mass", -1, "the mass of the movable pulley", "kg"},
  };
  return info;
}

EntityInfo make_two_side_mass_plane() {
  EntityInfo info;
  info.kind = EntityKind::kTwoSideMassPlane;
  info.dsl_name = "TwoSideMassPlane";
  info.snake_name = "two_side_mass_plane";
  info.fields = {
      number_field("mass", true),
      number_field("incline_angle", true),
      number_field("friction_coefficient", false, 0.0),
      number_field("face_length", false, 4.0),
      number_field("initial_velocity", false, 0.0),
  };
  info.ports = {{"top", PortType::kCableEnd}, {"bottom", PortType::kCableEnd}};
  info.validate = [](EntitySpec& e) {
    require_positive(e, "mass");
    require_angle(e, "incline_angle");
    require_nonnegative(e, "friction_coefficient");
    require_positive(e, "face_length");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    return std::vector<BodySpec>{
        body("plane", BodyKind::kPlane, {{"alpha", num(e, "incline_angle")}}),
        body("block", BodyKind::kMass, {{"m", num(e, "mass")}}),
    };
  };
  info.maskable = {
      {"mass", -1, "the mass of the block on the incline", "kg"},
      {"incline_angle", -1, "the incline angle", "rad"},
      {"friction_coefficient", -1, "the coefficient of friction", ""},
  };
  return info;
}

EntityInfo make_stacked_mass_plane() {
  EntityInfo info;
  info.kind = EntityKind::kStackedMassPlane;
  info.dsl_name = "StackedMassPlane";
  info.snake_name = "stacked_mass_plane";
  info.fields = {
      list_field("masses"),
      list_field("friction_coefficients", false),
      list_field("initial_velocities", false),
      number_field("block_length", false, 1.0),
      number_field("block_width", false, 0.5),
      number_field("block_height", false, 0.2),
  };
  info.validate = [](EntitySpec& e) {
    require_positive_list(e, "masses");
    std::size_t n = list(e, "masses").size();
    default_list(e, "friction_coefficients", n, 0.3);
    default_list(e, "initial_velocities", n, 0.0);
    require_list_size(e, "friction_coefficients", n);
    require_list_size(e, "initial_velocities", n);
    for (double mu : list(e, "friction_coefficients")) {
      if (mu < 0.0) fail(e, "friction coefficients must be >= 0");
    }
    require_positive(e, "block_length");
    require_positive(e, "block_width");
    require_positive(e, "block_height");
  };
  info.make_ports = [](const EntitySpec& e) {
    std::vector<PortSpec> ports;
    std::size_t n = e.params.count("masses") && e.params.at("masses").is_list()
                        ? e.params.at("masses").list().size()
                        : 0;
    for (std::size_t i = 0; i < n; ++i) {
      ports.push_back({"left_" + std::to_string(i), PortType::kCableEnd});
      ports.push_back({"right_" + std::to_string(i), PortType::kCableEnd});
    }
    return ports;
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("plane", BodyKind::kPlane, {{"alpha", 0.0}}));
    const auto& ms = list(e, "masses");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      out.push_back(body("block_" + std::to_string(i), BodyKind::kBar,
                         {{"w", num(e, "block_width")},
                          {"l", num(e, "block_length")},
                          {"h", num(e, "block_height")},
                          {"m", ms[i]}}));
    }
    return out;
  };
  info.maskable = {
      {"masses", 0, "the mass of the bottom block", "kg"},
      {"friction_coefficients", 1,
       "the coefficient of friction between the bottom and second block", ""},
  };
  return info;
}

EntityInfo make_directed_mass() {
  EntityInfo info;
  info.kind = EntityKind::kDirectedMass;
  info.dsl_name = "DirectedMass";
  info.snake_name = "directed_mass";
  info.fields = {
      number_field("mass", true),
      number_field("pulley_separation", false, 2.0),
      number_field("hang_depth", false, 1.0),
  };
  info.ports = {{"end_a", PortType::kCableEnd},
                {"end_b", PortType::kCableEnd}};
  info.validate = [](EntitySpec& e) {
    require_positive(e, "mass");
    require_positive(e, "pulley_separation");
    require_positive(e, "hang_depth");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    return std::vector<BodySpec>{
        body("pulley_a", BodyKind::kPulley, {{"m", 1.0}}),
        body("pulley_b", BodyKind::kPulley, {{"m", 1.0}}),
        body("block", BodyKind::kMass, {{"m", num(e, "mass")}}),
    };
  };
  info.maskable = {{"mass", -1, "the mass of the suspended block", "kg"}};
  return info;
}

EntityInfo make_mass_prism_plane() {
  EntityInfo info;
  info.kind = EntityKind::kMassPrismPlane;
  info.dsl_name = "MassPrismPlane";
  info.snake_name = "mass_prism_plane";
  info.fields = {
      number_field("wedge_mass", true),
      number_field("left_angle", true),
      number_field("right_angle", true),
      number_field("left_mass", false),
      number_field("right_mass", false),
      number_field("friction_coefficient", false, 0.0),
      number_field("face_length", false, 3.0),
  };
  info.validate = [](EntitySpec& e) {
    require_positive(e, "wedge_mass");
    require_angle(e, "left_angle");
    require_angle(e, "right_angle");
    if (!has(e, "left_mass") && !has(e, "right_mass")) {
      fail(e, "at least one of left_mass/right_mass is required");
    }
    if (has(e, "left_mass")) require_positive(e, "left_mass");
    if (has(e, "right_mass")) require_positive(e, "right_mass");
    require_nonnegative(e, "friction_coefficient");
    require_positive(e, "face_length");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("wedge", BodyKind::kTriangularPrism,
                       {{"alpha_l", num(e, "left_angle")},
                        {"alpha_r", num(e, "right_angle")},
                        {"m", num(e, "wedge_mass")}}));
    if (has(e, "left_mass")) {
      out.push_back(
          body("block_left", BodyKind::kMass, {{"m", num(e, "left_mass")}}));
    }
    if (has(e, "right_mass")) {
      out.push_back(
          body("block_right", BodyKind::kMass, {{"m", num(e, "right_mass")}}));
    }
    return out;
  };
  info.maskable = {
      {"wedge_mass", -1, "the mass of the wedge", "kg"},
      {"left_mass", -1, "the mass of the block on the left face", "kg"},
      {"right_mass", -1, "the mass of the block on the right face", "kg"},
      {"right_angle", -1, "the right face angle", "rad"},
  };
  return info;
}

EntityInfo make_mass_box_plane() {
  EntityInfo info;
  info.kind = EntityKind::kMassBoxPlane;
  info.dsl_name = "MassBoxPlane";
  info.snake_name = "mass_box_plane";
  info.fields = {
      number_field("box_mass", true),
      number_field("top_mass", true),
      number_field("side_mass", true),
      number_field("friction_coefficient", false, 0.0),
  };
  info.validate = [](EntitySpec& e) {
    require_positive(e, "box_mass");
    require_positive(e, "top_mass");
    require_positive(e, "side_mass");
    require_nonnegative(e, "friction_coefficient");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    return std::vector<BodySpec>{
        body("box", BodyKind::kMass, {{"m", num(e, "box_mass")}}),
        body("top_block", BodyKind::kMass, {{"m", num(e, "top_mass")}}),
        body("side_block", BodyKind::kMass, {{"m", num(e, "side_mass")}}),
    };
  };
  info.maskable = {
      {"box_mass", -1, "the mass of the large block", "kg"},
      {"top_mass", -1, "the mass of the block on top", "kg"},
      {"side_mass", -1, "the mass of the hanging block", "kg"},
  };
  return info;
}

EntityInfo make_twod_collision_plane() {
  EntityInfo info;
  info.kind = EntityKind::kTwoDCollisionPlane;
  info.dsl_name = "TwoDCollisionPlane";
  info.snake_name = "twoD_collision_plane";
  info.fields = {
      list_field("masses"),
      list_field("radii", false),
      list_field("initial_positions"),
      list_field("initial_velocities"),
      number_field("restitution", false, 1.0),
  };
  info.validate = [](EntitySpec& e) {
    require_positive_list(e, "masses", 2);
    std::size_t n = list(e, "masses").size();
    default_list(e, "radii", n, 0.2);
    require_positive_list(e, "radii");
    require_list_size(e, "radii", n);
    require_list_size(e, "initial_positions", 2 * n);
    require_list_size(e, "initial_velocities", 2 * n);
    double rest = num(e, "restitution");
    if (rest < 0.0 || rest > 1.0) fail(e, "restitution must be in [0, 1]");
    const auto& p = list(e, "initial_positions");
    const auto& r = list(e, "radii");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double dx = p[2 * i] - p[2 * j];
        double dy = p[2 * i + 1] - p[2 * j + 1];
        if (std::hypot(dx, dy) <= r[i] + r[j]) {
          fail(e, "balls " + std::to_string(i) + " and " + std::to_string(j) +
                      " overlap initially");
        }
      }
    }
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("plane", BodyKind::kPlane, {{"alpha", 0.0}}));
    const auto& ms = list(e, "masses");
    const auto& rs = list(e, "radii");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      out.push_back(body("ball_" + std::to_string(i), BodyKind::kSphere,
                         {{"r", rs[i]}, {"m", ms[i]}}));
    }
    return out;
  };
  info.maskable = {
      {"masses", 0, "the mass of the first ball", "kg"},
      {"masses", 1, "the mass of the second ball", "kg"},
      {"restitution", -1, "the coefficient of restitution", ""},
  };
  return info;
}

EntityInfo make_complex_collision_plane() {
  EntityInfo info;
  info.kind = EntityKind::kComplexCollisionPlane;
  info.dsl_name = "ComplexCollisionPlane";
  info.snake_name = "complex_collision_plane";
  info.fields = {
      string_field("object_types", true),
      list_field("masses"),
      list_field("sizes", false),
      list_field("initial_positions"),
      list_field("initial_velocities"),
      list_field("spring_constants", false),
      list_field("spring_lengths", false),
      number_field("restitution", false, 1.0),
  };
  info.validate = [](EntitySpec& e) {
    auto types = tokens(str(e, "object_types"));
    if (types.size() < 2) fail(e, "need at least two objects");
    std::size_t n = types.size();
    for (const auto& t : types) {
      if (t != "block" && t != "sphere" && t != "wall" && t != "spring_block") {
        fail(e, "unknown object type '" + t + "'");
      }
    }
    default_list(e, "sizes", n, 0.25);
    default_list(e, "spring_constants", n, 200.0);
    default_list(e, "spring_lengths", n, 0.5);
    require_list_size(e, "masses", n);
    require_list_size(e, "sizes", n);
    require_list_size(e, "initial_positions", n);
    require_list_size(e, "initial_velocities", n);
    require_list_size(e, "spring_constants", n);
    require_list_size(e, "spring_lengths", n);
    require_positive_list(e, "masses");
    require_positive_list(e, "sizes");
    double rest = num(e, "restitution");
    if (rest < 0.0 || rest > 1.0) fail(e, "restitution must be in [0, 1]");
    const auto& pos = list(e, "initial_positions");
    const auto& vel = list(e, "initial_velocities");
    const auto& sz = list(e, "sizes");
    for (std::size_t i = 0; i < n; ++i) {
      if (types[i] == "wall" && vel[i] != 0.0) {
        fail(e, "walls cannot have initial velocity");
      }
      if (i + 1 < n && pos[i] + sz[i] >= pos[i + 1] - sz[i + 1]) {
        fail(e, "objects must be ordered left to right without overlap");
      }
    }
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("plane", BodyKind::kPlane, {{"alpha", 0.0}}));
    auto types = tokens(str(e, "object_types"));
    const auto& ms = list(e, "masses");
    const auto& sz = list(e, "sizes");
    for (std::size_t i = 0; i < types.size(); ++i) {
      std::string nm = types[i] + "_" + std::to_string(i);
      if (types[i] == "sphere") {
        out.push_back(
            body(nm, BodyKind::kSphere, {{"r", sz[i]}, {"m", ms[i]}}));
      } else {
        out.push_back(body(nm, BodyKind::kBar,
                           {{"w", sz[i]},
                            {"l", 2.0 * sz[i]},
                            {"h", 2.0 * sz[i]},
                            {"m", ms[i]}}));
      }
    }
    return out;
  };
  info.maskable = {
      {"masses", 0, "the mass of the leftmost object", "kg"},
      {"masses", 1, "the mass of the second object", "kg"},
      {"restitution", -1, "the coefficient of restitution", ""},
      {"initial_velocities", 0, "the initial velocity of the leftmost object",
       "m/s"},
  };
  return info;
}

EntityInfo make_solar_system() {
  EntityInfo info;
  info.kind = EntityKind::kSolarSystem;
  info.dsl_name = "SolarSystem";
  info.snake_name = "solar_system";
  info.fields = {
      number_field("star_mass", true),
      list_field("planet_masses"),
      list_field("orbit_radii"),
      list_field("speed_factors", false),
  };
  info.validate = [](EntitySpec& e) {
    require_positive(e, "star_mass");
    require_positive_list(e, "planet_masses");
    std::size_t n = list(e, "planet_masses").size();
    require_positive_list(e, "orbit_radii");
    require_list_size(e, "orbit_radii", n);
    default_list(e, "speed_factors", n, 1.0);
    require_list_size(e, "speed_factors", n);
    for (double f : list(e, "speed_factors")) {
      // keep orbits bound: v < escape velocity = sqrt(2) * v_circular
      if (f <= 0.0 || f >= 1.4) fail(e, "speed_factors must be in (0, 1.4)");
    }
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("star", BodyKind::kSphere,
                       {{"r", 1.0}, {"m", num(e, "star_mass")}}));
    const auto& ms = list(e, "planet_masses");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      out.push_back(body("planet_" + std::to_string(i), BodyKind::kSphere,
                         {{"r", 1.0}, {"m", ms[i]}}));
    }
    return out;
  };
  info.maskable = {
      {"star_mass", -1, "the mass of the star", "kg"},
      {"planet_masses", 0, "the mass of the first planet", "kg"},
      {"orbit_radii", 0, "the initial orbital radius of the first planet",
       "m"},
  };
  return info;
}

EntityInfo make_rocket_entity() {
  EntityInfo info;
  info.kind = EntityKind::kRocketEntity;
  info.dsl_name = "RocketEntity";
  info.snake_name = "rocket_entity";
  info.fields = {
      number_field("dry_mass", true),
      number_field("initial_mass", true),
      number_field("burn_rate", true),
      number_field("exhaust_speed", true),
      number_field("planet_mass", true),
      number_field("planet_radius", false, 6.371e6),
  };
  info.validate = [](EntitySpec& e) {
    require_positive(e, "dry_mass");
    require_positive(e, "burn_rate");
    require_positive(e, "exhaust_speed");
    require_positive(e, "planet_mass");
    require_positive(e, "planet_radius");
    if (num(e, "initial_mass") < num(e, "dry_mass")) {
      fail(e, "initial_mass must be >= dry_mass");
    }
  };
  info.expand_bodies = [](const EntitySpec& e) {
    return std::vector<BodySpec>{
        body("planet", BodyKind::kSphere,
             {{"r", num(e, "planet_radius")}, {"m", num(e, "planet_mass")}}),
        body("rocket", BodyKind::kRocket,
             {{"m_dry", num(e, "dry_mass")}, {"m0", num(e, "initial_mass")}}),
    };
  };
  info.maskable = {
      {"dry_mass", -1, "the dry mass of the rocket", "kg"},
      {"initial_mass", -1, "the initial total mass of the rocket", "kg"},
      {"burn_rate", -1, "the fuel burn rate", "kg/s"},
      {"exhaust_speed", -1, "the exhaust speed", "m/s"},
  };
  return info;
}

EntityInfo make_rotation_entity() {
  EntityInfo info;
  info.kind = EntityKind::kRotationEntity;
  info.dsl_name = "RotationEntity";
  info.snake_name = "rotation_entity";
  info.fields = {
      string_field("shape_types", true),
      list_field("shape_masses"),
      list_field("shape_sizes"),
      list_field("shape_offsets"),
      number_field("initial_angle", false, 0.3),
      number_field("initial_angular_velocity", false, 0.0),
  };
  info.validate = [](EntitySpec& e) {
    auto types = tokens(str(e, "shape_types"));
    if (types.empty()) fail(e, "need at least one shape");
    for (const auto& t : types) {
      if (t != "bar" && t != "sphere" && t != "cylinder" && t != "disc" &&
          t != "hemisphere") {
        fail(e, "unsupported pendulum shape '" + t + "'");
      }
    }
    std::size_t n = types.size();
    require_positive_list(e, "shape_masses");
    require_list_size(e, "shape_masses", n);
    require_positive_list(e, "shape_sizes");
    require_list_size(e, "shape_sizes", n);
    require_list_size(e, "shape_offsets", n);
    double weighted = 0.0;
    const auto& offs = list(e, "shape_offsets");
    const auto& ms = list(e, "shape_masses");
    for (std::size_t i = 0; i < n; ++i) {
      if (offs[i] < 0.0) fail(e, "shape_offsets must be >= 0");
      weighted += ms[i] * offs[i];
    }
    if (weighted <= 0.0) {
      fail(e, "center of mass must not coincide with the pivot");
    }
    double th = num(e, "initial_angle");
    if (std::abs(th) >= std::numbers::pi) {
      fail(e, "initial_angle must lie in (-pi, pi)");
    }
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    auto types = tokens(str(e, "shape_types"));
    const auto& ms = list(e, "shape_masses");
    const auto& sz = list(e, "shape_sizes");
    for (std::size_t i = 0; i < types.size(); ++i) {
      std::string nm = types[i] + "_" + std::to_string(i);
      if (types[i] == "bar") {
        out.push_back(body(nm, BodyKind::kBar,
                           {{"w", 0.05},
                            {"l", sz[i]},
                            {"h", 0.05},
                            {"m", ms[i]}}));
      } else if (types[i] == "sphere") {
        out.push_back(
            body(nm, BodyKind::kSphere, {{"r", sz[i]}, {"m", ms[i]}}));
      } else if (types[i] == "cylinder") {
        out.push_back(body(nm, BodyKind::kCylinder,
                           {{"r", sz[i]}, {"h", sz[i]}, {"m", ms[i]}}));
      } else if (types[i] == "disc") {
        out.push_back(body(nm, BodyKind::kDisc, {{"r", sz[i]}, {"m", ms[i]}}));
      } else {
        out.push_back(
            body(nm, BodyKind::kHemisphere, {{"r", sz[i]}, {"m", ms[i]}}));
      }
    }
    return out;
  };
  info.maskable = {
      {"shape_masses", 0, "the mass of the first shape", "kg"},
      {"shape_sizes", 0, "the size of the first shape", "m"},
      {"initial_angle", -1, "the initial angle from the vertical", "rad"},
  };
  return info;
}

EntityInfo make_rolling_entity() {
  EntityInfo info;
  info.kind = EntityKind::kRollingEntity;
  info.dsl_name = "RollingEntity";
  info.snake_name = "rolling_entity";
  info.fields = {
      string_field("shape_type", true),
      number_field("mass", true),
      number_field("radius", true),
      number_field("inner_radius", false),
      number_field("incline_angle", true),
      number_field("incline_length", false, 10.0),
  };
  info.validate = [](EntitySpec& e) {
    const std::string& t = str(e, "shape_type");
    bool hollow = t == "hollow_sphere" || t == "hollow_cylinder";
    if (t != "sphere" && t != "cylinder" && t != "disc" && !hollow) {
      fail(e, "unsupported rolling shape '" + t + "'");
    }
    require_positive(e, "mass");
    require_positive(e, "radius");
    if (hollow) {
      if (!has(e, "inner_radius")) fail(e, "hollow shapes need inner_radius");
      require_positive(e, "inner_radius");
      if (num(e, "inner_radius") >= num(e, "radius")) {
        fail(e, "inner_radius must be < radius");
      }
    }
    require_angle(e, "incline_angle");
    require_positive(e, "incline_length");
  };
  info.expand_bodies = [](const EntitySpec& e) {
    std::vector<BodySpec> out;
    out.push_back(body("plane", BodyKind::kPlane,
                       {{"alpha", num(e, "incline_angle")}}));
    const std::string& t = str(e, "shape_type");
    double m = num(e, "mass");
    double r = num(e, "radius");
    if (t == "sphere") {
      out.push_back(body("roller", BodyKind::kSphere, {{"r", r}, {"m", m}}));
    } else if (t == "cylinder" || t == "hollow_cylinder") {
      out.push_back(
          body("roller", BodyKind::kCylinder, {{"r", r}, {"h", r}, {"m", m}}));
    } else if (t == "disc") {
      out.push_back(body("roller", BodyKind::kDisc, {{"r", r}, {"m", m}}));
    } else {
      double rh = num(e, "inner_radius");
      out.push_back(body("roller", BodyKind::kSphereWithHole,
                         {{"r", r},
                          {"r_h", rh},
                          {"p_h", std::vector<double>{0.0, 0.0, 0.0}},
                          {"t", r - rh},
                          {"m", m}}));
    }
    return out;
  };
  info.maskable = {
      {"incline_angle", -1, "the incline angle", "rad"},
      {"mass", -1, "the mass of the rolling body", "kg"},
      {"inner_radius", -1, "the inner radius of the shell", "m"},
  };
  return info;
}

EntityInfo make_em_entity() {
  EntityInfo info;
  info.kind = EntityKind::kEmEntity;
  info.dsl_name = "EmEntity";
  info.snake_name = "em_entity";
  info.fields = {
      number_field("mass", true),
      number_field("charge", false, 0.0),
      list_field("initial_position", false),
      list_field("initial_velocity", false),
      list_field("electric_field", false),
      list_field("magnetic_field", false),
      string_field("gravity", false, "auto"),
  };
  info.validate = [](EntitySpec& e) {
    require_positive(e, "mass");
    default_list(e, "initial_position", 3, 0.0);
    default_list(e, "initial_velocity", 3, 0.0);
    default_list(e, "electric_field", 3, 0.0);
    default_list(e, "magnetic_field", 3, 0.0);
    require_list_size(e, "initial_position", 3);
    require_list_size(e, "initial_velocity", 3);
    require_list_size(e, "electric_field", 3);
    require_list_size(e, "magnetic_field", 3);
    const std::string& grav = str(e, "gravity");
    if (grav != "on" && grav != "off" && grav != "auto") {
      fail(e, "gravity must be on, off or auto");
    }
  };
  info.expand_bodies = [](const EntitySpec& e) {
    return std::vector<BodySpec>{
        body("particle", BodyKind::kMass, {{"m", num(e, "mass")}}),
    };
  };
  info.maskable = {
      {"mass", -1, "the mass of the particle", "kg"},
      {"charge", -1, "the charge of the particle", "C"},
      {"initial_velocity", 2, "the initial vertical velocity", "m/s"},
      {"electric_field", 2, "the vertical electric field component", "V/m"},
  };
  return info;
}

std::vector<EntityInfo> build_entity_catalog() {
  std::vector<EntityInfo> cat;
  cat.push_back(make_mass_with_fixed_pulley());
  cat.push_back(
      make_movable_pulley(EntityKind::kMassWithMovablePulley, false));
  cat.push_back(
      make_movable_pulley(EntityKind::kMassWithReverseMovablePulley, true));
  cat.push_back(make_two_side_mass_plane());
  cat.push_back(make_stacked_mass_plane());
  cat.push_back(make_directed_mass());
  cat.push_back(make_mass_prism_plane());
  cat.push_back(make_mass_box_plane());
  cat.push_back(make_twod_collision_plane());
  cat.push_back(make_complex_collision_plane());
  cat.push_back(make_solar_system());
  cat.push_back(make_rocket_entity());
  cat.push_back(make_rotation_entity());
  cat.push_back(make_rolling_entity());
  cat.push_back(make_em_entity());
  return cat;
}

}  // namespace

const std::vector<BodyInfo>& body_catalog() {
  static const std::vector<BodyInfo> catalog = {
      {BodyKind::kMass, "mass", {"m"}},
      {BodyKind::kSphere, "sphere", {"r", "m"}},
      {BodyKind::kPolygonalPrism, "polygonal_prism", {"n", "r", "h", "m"}},
      {BodyKind::kCylinder, "cylinder", {"r", "h", "m"}},
      {BodyKind::kDisc, "disc", {"r", "m"}},
      {BodyKind::kBar, "bar", {"w", "l", "h", "m"}},
      {BodyKind::kHemisphere, "hemisphere", {"r", "m"}},
      {BodyKind::kBowl, "bowl", {"r", "h_c", "t", "m"}},
      {BodyKind::kSphereWithHole,
       "sphere_with_hole",
       {"r", "r_h", "p_h", "t", "m"}},
      {BodyKind::kRocket, "rocket", {"m_dry", "m0"}},
      {BodyKind::kTriangularPrism,
       "triangular_prism",
       {"alpha_l", "alpha_r", "m"}},
      {BodyKind::kPlane, "plane", {"alpha"}},
      {BodyKind::kPulley, "pulley", {"m"}},
      {BodyKind::kSpringMassSystem,
       "spring_mass_system",
       {"k", "l0", "x", "m"}},
  };
  return catalog;
}

const BodyInfo& body_info(BodyKind kind) {
  for (const auto& b : body_catalog()) {
    if (b.kind == kind) return b;
  }
  throw Error("unknown body kind");
}

const std::vector<EntityInfo>& entity_catalog() {
  static const std::vector<EntityInfo> catalog = build_entity_catalog();
  return catalog;
}

const EntityInfo& entity_info(EntityKind kind) {
  for (const auto& e : entity_catalog()) {
    if (e.kind == kind) return e;
  }
  throw Error("unknown entity kind");
}

std::optional<EntityKind> entity_kind_from_name(const std::string& name) {
  for (const auto& e : entity_catalog()) {
    if (e.dsl_name == name || e.snake_name == name) return e.kind;
  }
  return std::nullopt;
}

void finalize_entity(EntitySpec& entity) {
  const EntityInfo& info = entity_info(entity.kind);

  // Unknown keys are rejected outright.
  for (const auto& [key, value] : entity.params) {
    bool known = std::any_of(info.fields.begin(), info.fields.end(),
                             [&](const ParamField& f) { return f.name == key; });
    if (!known) fail(entity, "unknown parameter '" + key + "'");
  }

  for (const auto& f : info.fields) {
    auto it = entity.params.find(f.name);
    if (it == entity.params.end()) {
      if (f.required) fail(entity, "missing required parameter '" + f.name + "'");
      if (f.default_value) entity.params[f.name] = *f.default_value;
      continue;
    }
    bool ok = (f.type == FieldType::kNumber && it->second.is_number()) ||
              (f.type == FieldType::kString && it->second.is_string()) ||
              (f.type == FieldType::kList && it->second.is_list());
    if (!ok) {
      const char* want = f.type == FieldType::kNumber   ? "a number"
                         : f.type == FieldType::kString ? "a string"
                                                        : "a list of numbers";
      fail(entity, "parameter '" + f.name + "' must be " + want);
    }
  }

  if (info.validate) info.validate(entity);
  entity.bodies = info.expand_bodies(entity);
  entity.connection_points =
      info.make_ports ? info.make_ports(entity) : info.ports;

  for (const auto& b : entity.bodies) {
    for (const auto& [key, value] : b.params) {
      const auto& bi = body_info(b.kind);
      bool known = std::any_of(bi.params.begin(), bi.params.end(),
                               [&](const char* p) { return key == p; });
      if (!known) {
        fail(entity, "body '" + b.name + "' has no parameter '" + key + "'");
      }
    }
  }
}

bool ports_compatible(PortType a, PortType b) {
  if (a == PortType::kCableEnd && b == PortType::kCableEnd) return true;
  if (a == PortType::kCableEnd && b == PortType::kAttach) return true;
  if (a == PortType::kAttach && b == PortType::kCableEnd) return true;
  return false;  // two attachment points cannot be joined by a cable
}

}  // namespace forge::dsl
