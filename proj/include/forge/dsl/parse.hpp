#pragma once

#include "forge/dsl/types.hpp"
#include "forge/sha256.hpp"

#include <string>
#include <string_view>

namespace forge::dsl {

// Parses and validates a scene document. Throws ParseError (syntax, unknown
// keys/kinds, missing parameters) or ValidationError (dangling references,
// incompatible ports, disconnected entity graph).
SceneSpec parse_scene(std::string_view text);
SceneSpec parse_scene_file(const std::string& path);

// Port-pairing verdict for a single proposed connection. `a_used`/`b_used`
// flag ports already occupied by another connection.
struct ConnectionVerdict {
  bool ok = false;
  std::string reason;
};

ConnectionVerdict validate_connection(const EntitySpec& a,
                                      const std::string& port_a,
                                      PortDirection dir_a, bool a_used,
                                      const EntitySpec& b,
                                      const std::string& port_b,
                                      PortDirection dir_b, bool b_used);

// Canonical byte serialization: entities sorted by name, connections sorted
// by endpoint keys, shortest round-trip number formatting. The exact layout
// is documented in docs/formats.md. The output is itself a valid scene
// document that reparses to an equal-hash SceneSpec.
std::string serialize_scene(const SceneSpec& scene);

// SHA-256 over serialize_scene(scene).
Digest256 canonical_hash(const SceneSpec& scene);
std::string canonical_hash_hex(const SceneSpec& scene);

}  // namespace forge::dsl
