#include "forge/dsl/types.hpp"

#include "forge/dsl/registry.hpp"

namespace forge::dsl {

const char* to_string(BodyKind kind) { return body_info(kind).name; }

const char* to_string(EntityKind kind) {
  return entity_info(kind).snake_name.c_str();
}

const char* to_string(PortDirection dir) {
  return dir == PortDirection::kInnerToOuter ? "inner_to_outer"
                                             : "outer_to_inner";
}

}  // namespace forge::dsl
