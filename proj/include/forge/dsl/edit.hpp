#pragma once

#include "forge/dsl/types.hpp"

#include <string>

namespace forge::dsl {

// Addressing scheme for scalar scene parameters: entity name + field name +
// optional list index (-1 for scalar fields). Used by reverse-mode masking,
// symbolic validation and ablation edits.
struct ParamPath {
  std::string entity;
  std::string field;
  int index = -1;

  std::string str() const {
    return index < 0 ? entity + "." + field
                     : entity + "." + field + "[" + std::to_string(index) + "]";
  }
};

ParamPath parse_param_path(const std::string& text);

double get_param(const SceneSpec& scene, const ParamPath& path);

// Sets the value and re-finalizes the touched entity (bodies and ports are
// re-expanded, invariants re-checked). Throws on invalid paths or values.
void set_param(SceneSpec& scene, const ParamPath& path, double value);

}  // namespace forge::dsl
