#pragma once

#include "forge/dsl/types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace forge::gen {

enum class SamplingLaw { kUniform, kLogUniform };

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  SamplingLaw law = SamplingLaw::kUniform;
};

// Randomization config. parameter_ranges is keyed by quantity class
// ("mass", "incline_angle", "friction", "restitution", "star_mass", ...);
// kinds missing from the map fall back to built-in defaults.
struct GenConfig {
  std::uint64_t rng_seed = 0;
  int entity_count_min = 1;
  int entity_count_max = 3;
  std::set<dsl::EntityKind> allowed_entity_kinds;  // empty = all kinds
  std::map<std::string, Range> parameter_ranges;
  int max_attempts = 64;
  double extra_connection_probability = 0.15;

  void validate() const;  // throws ValidationError
};

// Default range for a quantity class (masses log-uniform [0.1, 100] kg,
// angles uniform [10 deg, 80 deg], celestial scales log-uniform, ...).
Range default_range(const std::string& key);

// Draws one valid scene. Pure function of cfg (the seed included): the same
// config reproduces the same scene byte for byte.
dsl::SceneSpec generate_scene(const GenConfig& cfg);

// n scenes on seeds derived from cfg.rng_seed; duplicates by canonical hash
// are regenerated. Throws Error when the retry budget runs out.
std::vector<dsl::SceneSpec> generate_batch(const GenConfig& cfg, int n);

}  // namespace forge::gen
