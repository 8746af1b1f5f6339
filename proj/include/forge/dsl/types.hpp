#pragma once

#include "forge/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace forge::dsl {

// A parameter value as written in a scene document. All numbers are SI.
struct ParamValue {
  std::variant<double, std::string, std::vector<double>> value;

  ParamValue() : value(0.0) {}
  ParamValue(double d) : value(d) {}
  ParamValue(std::string s) : value(std::move(s)) {}
  ParamValue(std::vector<double> v) : value(std::move(v)) {}

  bool is_number() const { return std::holds_alternative<double>(value); }
  bool is_string() const { return std::holds_alternative<std::string>(value); }
  bool is_list() const {
    return std::holds_alternative<std::vector<double>>(value);
  }

  double number() const { return std::get<double>(value); }
  const std::string& str() const { return std::get<std::string>(value); }
  const std::vector<double>& list() const {
    return std::get<std::vector<double>>(value);
  }

  bool operator==(const ParamValue&) const = default;
};

using ParamMap = std::map<std::string, ParamValue>;

enum class BodyKind {
  kMass,
  kSphere,
  kPolygonalPrism,
  kCylinder,
  kDisc,
  kBar,
  kHemisphere,
  kBowl,
  kSphereWithHole,
  kRocket,
  kTriangularPrism,
  kPlane,
  kPulley,
  kSpringMassSystem,
};

// A primitive parameterized part, instantiated by its entity's template.
struct BodySpec {
  std::string name;
  BodyKind kind;
  ParamMap params;
};

enum class EntityKind {
  kMassWithFixedPulley,
  kMassWithMovablePulley,
  kMassWithReverseMovablePulley,
  kTwoSideMassPlane,
  kStackedMassPlane,
  kDirectedMass,
  kMassPrismPlane,
  kMassBoxPlane,
  kTwoDCollisionPlane,
  kComplexCollisionPlane,
  kSolarSystem,
  kRocketEntity,
  kRotationEntity,
  kRollingEntity,
  kEmEntity,
};

inline constexpr int kEntityKindCount = 15;

// How a connection endpoint relates to the entity: a cable sourced from
// inside the entity (inner_to_outer) or received from outside (outer_to_inner).
enum class PortDirection { kInnerToOuter, kOuterToInner };

// What kind of cable interface a port exposes.
enum class PortType {
  kCableEnd,  // an open cable end fed over the entity's own guide
  kAttach,    // a fixed attachment point an external cable ties to
};

struct PortSpec {
  std::string name;
  PortType type;
};

struct EntitySpec {
  std::string name;
  EntityKind kind;
  Vec3 position = Vec3::Zero();
  ParamMap params;                    // entity-level parameters (validated)
  std::vector<BodySpec> bodies;       // expanded from the kind's template
  std::vector<PortSpec> connection_points;  // from the registry

  const PortSpec* find_port(const std::string& port) const {
    for (const auto& p : connection_points) {
      if (p.name == port) return &p;
    }
    return nullptr;
  }
};

struct ConnectionEnd {
  std::string entity;
  std::string port;  // resolved during parsing when omitted in the document
  PortDirection direction;
};

// A tendon (string) link between two entity ports.
struct Connection {
  std::string mode = "tendon";
  ConnectionEnd a;
  ConnectionEnd b;
  std::optional<double> length;  // accepted but dynamics-inert
};

struct SceneSpec {
  std::string name;
  std::uint64_t rng_seed = 0;
  Vec3 gravity{0.0, 0.0, -kStandardGravity};
  std::vector<EntitySpec> entities;
  std::vector<Connection> connections;

  const EntitySpec* find_entity(const std::string& name) const {
    for (const auto& e : entities) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  // Magnitude of the gravity vector (scene-level g).
  double g() const { return gravity.norm(); }
};

const char* to_string(BodyKind kind);
const char* to_string(EntityKind kind);
const char* to_string(PortDirection dir);

}  // namespace forge::dsl
