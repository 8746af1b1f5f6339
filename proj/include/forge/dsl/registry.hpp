#pragma once

#include "forge/dsl/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace forge::dsl {

// Catalog row for a primitive body kind: its DSL name and the randomizable
// parameters it carries.
struct BodyInfo {
  BodyKind kind;
  const char* name;
  std::vector<const char*> params;
};

const std::vector<BodyInfo>& body_catalog();
const BodyInfo& body_info(BodyKind kind);

enum class FieldType { kNumber, kString, kList };

// Schema entry for one entity-level parameter. A field that is neither
// required nor defaulted may be absent (e.g. the optional wedge masses).
struct ParamField {
  std::string name;
  FieldType type = FieldType::kNumber;
  bool required = false;
  std::optional<ParamValue> default_value;
};

// A parameter of this kind that reverse-mode questions may mask. `index < 0`
// addresses a scalar field, otherwise element `index` of a list field.
struct MaskableParam {
  std::string field;
  int index = -1;
  std::string phrase;  // e.g. "the mass of the suspended block"
  std::string unit;
};

struct EntityInfo {
  EntityKind kind;
  std::string dsl_name;    // CamelCase, as in scene documents
  std::string snake_name;  // accepted alias
  std::vector<ParamField> fields;
  std::vector<PortSpec> ports;
  // Ports that depend on parameters (e.g. one pair per stacked block).
  // When set, overrides `ports`.
  std::function<std::vector<PortSpec>(const EntitySpec&)> make_ports;
  // Expands the validated entity parameters into its body list.
  std::function<std::vector<BodySpec>(const EntitySpec&)> expand_bodies;
  // Cross-field validation; may also fill size-dependent defaults.
  std::function<void(EntitySpec&)> validate;
  std::vector<MaskableParam> maskable;
};

const std::vector<EntityInfo>& entity_catalog();
const EntityInfo& entity_info(EntityKind kind);

// Resolves a DSL type string ("MassWithFixedPulley" or
// "mass_with_fixed_pulley") to a kind. nullopt for unknown names.
std::optional<EntityKind> entity_kind_from_name(const std::string& name);

// Fills defaults, checks every field against the schema (unknown keys
// rejected), runs cross-field validation, and expands bodies + ports.
// Throws ValidationError with the entity name in the message.
void finalize_entity(EntitySpec& entity);

// Port pairing rule: open cable ends tie to open cable ends or to attachment
// points; two attachment points cannot be joined by a cable.
bool ports_compatible(PortType a, PortType b);

}  // namespace forge::dsl
