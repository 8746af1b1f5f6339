#pragma once

#include "forge/dsl/types.hpp"
#include "forge/qa/qa.hpp"
#include "forge/sim/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace forge::filter {

// A derived scene used to detect shortcut-solvable questions: one entity
// removed (connectivity preserved) or one joint/constraint welded rigid.
struct AblationVariant {
  std::string kind;    // "entity_removal" | "joint_glue"
  std::string target;  // removed entity name or glued joint id
  dsl::SceneSpec scene;
  sim::Trace trace;  // simulated with the original dt/horizon and pruning
};

// All ablation variants of a scene, each compiled and simulated. Variants
// that fail to simulate are dropped. Single-entity scenes without joints
// yield an empty list.
std::vector<AblationVariant> enumerate_ablations(const dsl::SceneSpec& scene,
                                                 const qa::QaContext& ctx);

// Compiles the scene with one joint replaced by a rigid weld.
sim::CompiledModel compile_with_weld(const dsl::SceneSpec& scene,
                                     const std::string& joint_id, double dt,
                                     double horizon);

struct ShortcutVerdict {
  bool shortcut = false;
  std::string witness;      // variant target that reproduced the answer
  double variant_value = 0; // the witness's re-simulated answer
  double delta = 0;         // |variant - original|
};

// A pair is a shortcut when any variant reproduces the probed value within
// tol (relative, epsilon-guarded at zero). `original_value` is the probe of
// the unablated trace at the pair's provenance. Variants where the probe is
// not evaluable (body removed, trace truncated before t) are skipped.
ShortcutVerdict is_shortcut(const qa::QAPair& qa, double original_value,
                            const std::vector<AblationVariant>& variants,
                            double tol);

struct DiscardRecord {
  std::string id;
  std::string reason;  // "duplicate" | "shortcut"
  std::string witness;
  double delta = 0;
};

struct FilterStats {
  int total_in = 0;
  int duplicates = 0;
  int shortcuts = 0;
  int symbolic_bypassed = 0;
  int kept = 0;
  double discard_fraction() const {
    return total_in == 0
               ? 0.0
               : static_cast<double>(duplicates + shortcuts) / total_in;
  }
};

struct SceneBundle {
  dsl::SceneSpec scene;
  const sim::Trace* trace = nullptr;
  const std::vector<AblationVariant>* variants = nullptr;
};

struct FilterResult {
  std::vector<qa::QAPair> kept;
  std::vector<qa::QAPair> discarded;
  std::vector<DiscardRecord> log;
  FilterStats stats;
};

// Deduplicates (identical scene hash, template, body, quantity, rounded t),
// then discards shortcut-solvable pairs. Output is independent of the input
// ordering. Pairs whose scene bundle is missing pass through unfiltered.
FilterResult filter_corpus(std::vector<qa::QAPair> pairs,
                           const std::map<std::string, SceneBundle>& scenes,
                           double tol = 0.05, bool dedup = true);

}  // namespace forge::filter
