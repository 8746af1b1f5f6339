#pragma once

#include "forge/dsl/edit.hpp"
#include "forge/dsl/types.hpp"
#include "forge/prune/prune.hpp"
#include "forge/qa/expression.hpp"
#include "forge/sim/trace.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace forge::qa {

enum class Mode { kNumeric, kReverse, kSymbolic };

const char* to_string(Mode mode);

struct NumberAnswer {
  double value = 0;
  std::string unit;
};

struct MaskedParamAnswer {
  std::string path;  // dsl::ParamPath::str()
  double value = 0;
  std::string unit;
};

struct SymbolicAnswer {
  std::string expression;
  // symbol -> short description ("m1: mass of the first block, kg")
  std::map<std::string, std::string> symbol_table;
};

using AnswerPayload =
    std::variant<NumberAnswer, MaskedParamAnswer, SymbolicAnswer>;

struct Provenance {
  std::string scene_hash;
  std::string body;
  std::string quantity;
  double t = 0;
};

struct QAPair {
  std::string id;
  Mode mode = Mode::kNumeric;
  std::string question;
  AnswerPayload answer;
  Provenance provenance;
  std::map<std::string, bool> filter_verdicts;
  int template_id = 0;
  std::vector<std::string> scene_kinds;  // sorted entity kinds, for strata

  double numeric_value() const;  // number/masked value; throws for symbolic
};

// Everything generation needs to re-run a scene: the pruning config travels
// with the simulation settings so derived traces are pruned the same way.
struct QaContext {
  double dt = 0.0;       // 0 = per-scene default
  double horizon = 0.0;  // 0 = per-scene default
  prune::PruneConfig prune;

  sim::Trace resimulate(const dsl::SceneSpec& scene, double dt_override = 0.0,
                        double horizon_override = 0.0) const;
};

// Deterministic scene narration assembled from per-entity templates; every
// numeric parameter value appears verbatim. `masked` hides one parameter
// behind the symbol "x".
std::string describe_scene(const dsl::SceneSpec& scene,
                           const std::optional<dsl::ParamPath>& masked =
                               std::nullopt);

// Same, with arbitrary parameter-path -> symbol replacements (symbolic mode
// renders every bound parameter as its symbol).
std::string describe_scene(const dsl::SceneSpec& scene,
                           const std::map<std::string, std::string>& repl);

// Forward state query. Throws on probe errors.
QAPair make_numeric(const sim::Trace& trace, const dsl::SceneSpec& scene,
                    const std::string& body, const std::string& quantity,
                    double t, std::uint64_t seed = 0);

// Masked-parameter inversion. Verifies identifiability by re-simulating at
// 0.9x/1.1x of the masked value: the observation must move monotonically by
// more than twice the reward tolerance. Throws Error when the parameter is
// not identifiable from the observation.
QAPair make_reverse(const sim::Trace& trace, const dsl::SceneSpec& scene,
                    const dsl::ParamPath& masked, const std::string& body,
                    const std::string& quantity, double t,
                    const QaContext& ctx, std::uint64_t seed = 0,
                    double rel_tol = 0.05);

// One registered closed form over a scene, with everything needed to
// validate it numerically.
struct SymbolicForm {
  std::string label;            // e.g. "max_height_above_launch"
  std::string question_clause;  // "What is the maximum height ... ?"
  Expr::Ptr expr;
  std::string unit;
  std::string body;
  struct Binding {
    std::string symbol;
    std::string description;
    std::string unit;
    std::optional<dsl::ParamPath> path;  // scene parameter, if any
    double value = 0;                    // current value ("t" draws randomly)
  };
  std::vector<Binding> bindings;
  double sim_dt = 0.0;
  double sim_horizon = 0.0;
  // Measured value of the target quantity on a (possibly perturbed) scene.
  std::function<double(const dsl::SceneSpec&, const sim::Trace&,
                       const std::map<std::string, double>&)>
      measure;
};

// Registered closed forms matching this scene (empty when unsupported).
std::vector<SymbolicForm> symbolic_forms(const dsl::SceneSpec& scene);

// Symbolic question from a registered form; validates the expression against
// the simulator at `draws` perturbed parameter draws within rel_tol. Throws
// Error on validation failure (a solver bug) or when no form matches.
QAPair make_symbolic(const dsl::SceneSpec& scene, const SymbolicForm& form,
                     const QaContext& ctx, std::uint64_t seed = 0,
                     int draws = 5, double rel_tol = 0.01);

// JSONL round-trip (schema documented in docs/formats.md).
std::string to_jsonl(const QAPair& qa);
QAPair qa_from_json(const std::string& line);

}  // namespace forge::qa
