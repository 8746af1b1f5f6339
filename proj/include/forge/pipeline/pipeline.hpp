#pragma once

#include "forge/filter/filter.hpp"
#include "forge/gen/generate.hpp"
#include "forge/prune/prune.hpp"
#include "forge/qa/qa.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace forge::pipeline {

struct QaModesConfig {
  bool numeric = true;
  bool reverse = true;
  bool symbolic = true;
  int numeric_per_scene = 2;
  int reverse_per_scene = 1;
  int symbolic_per_scene = 1;
  // probe times drawn uniformly from [t_lo_frac, t_hi_frac] x trace length
  double t_lo_frac = 0.2;
  double t_hi_frac = 1.0;
};

struct FilterConfig {
  double tol = 0.05;
  bool dedup = true;
  bool shortcut = true;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  gen::GenConfig gen;
  double dt = 0.0;       // 0 = per-scene default
  double horizon = 0.0;  // 0 = per-scene default
  prune::PruneConfig prune;
  QaModesConfig qa;
  FilterConfig filter;
  int shard_size = 1000;
  int workers = 1;

  void validate() const;
  // canonical JSON of every field; hashed into the manifest
  std::string canonical_json() const;
};

// YAML config file; missing keys keep defaults. Throws on unknown keys.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& yaml_text);

struct StageCounts {
  int scenes_requested = 0;
  int scenes_generated = 0;
  int scenes_failed = 0;
  int pruned_rejected = 0;
  int qa_numeric = 0;
  int qa_reverse = 0;
  int qa_symbolic = 0;
  int qa_generated = 0;
  int duplicates_removed = 0;
  int shortcuts_removed = 0;
  int kept = 0;
};

struct GenerateResult {
  StageCounts counts;
  std::vector<std::string> shard_files;  // relative to out_dir
  std::string manifest_path;
  std::string manifest_hash;
  double discard_fraction = 0.0;
  std::vector<std::string> errors;  // capped scene-level error log
};

// Full corpus run: generate -> simulate -> prune -> QA -> filter -> shards +
// manifest under out_dir. `count` is the number of QA pairs to generate
// before filtering. Deterministic for a fixed (config, count): reruns and
// different worker counts give byte-identical output.
GenerateResult run_generate(const PipelineConfig& cfg, int count,
                            const std::string& out_dir);

}  // namespace forge::pipeline
