#include "forge/qa/qa.hpp"

#include "forge/dsl/parse.hpp"
#include "forge/dsl/registry.hpp"
#include "forge/rng.hpp"
#include "forge/sha256.hpp"
#include "forge/sim/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace forge::qa {

namespace {

using nlohmann::json;

std::vector<std::string> sorted_kinds(const dsl::SceneSpec& scene) {
  std::set<std::string> kinds;
  for (const auto& e : scene.entities) {
    kinds.insert(dsl::to_string(e.kind));
  }
  return {kinds.begin(), kinds.end()};
}

std::string subject_phrase(const std::string& body) {
  if (body == "system") return "the system as a whole";
  if (body.rfind("tendon:", 0) == 0 || body.rfind("anchor:", 0) == 0) {
    return "the cable '" + body + "'";
  }
  if (body.find("/spring") != std::string::npos ||
      body.find("/cable") != std::string::npos ||
      body.find("/string") != std::string::npos ||
      body.find("/link") != std::string::npos) {
    return "the string '" + body + "'";
  }
  if (body.find('|') != std::string::npos) {
    return "the contact '" + body + "'";
  }
  return "body '" + body + "'";
}

std::string question_sentence(int paraphrase, const std::string& qphrase,
                              const std::string& subject, double t,
                              const std::string& unit) {
  std::ostringstream os;
  switch (paraphrase % 3) {
    case 0:
      os << "What is " << qphrase << " of " << subject << " at t = "
         << format_double(t) << " s?";
      break;
    case 1:
      os << "Determine " << qphrase << " of " << subject << " "
         << format_double(t) << " s after the start.";
      break;
    default:
      os << "Compute " << qphrase << " of " << subject << " at time t = "
         << format_double(t) << " s.";
      break;
  }
  if (!unit.empty()) os << " Give a number in " << unit << ".";
  return os.str();
}

std::string make_id(const std::string& scene_hash, const std::string& salt) {
  return sha256_hex(scene_hash + "|" + salt).substr(0, 16);
}

const dsl::MaskableParam* find_maskable(const dsl::EntitySpec& entity,
                                        const dsl::ParamPath& path) {
  const auto& info = dsl::entity_info(entity.kind);
  const dsl::MaskableParam* field_match = nullptr;
  for (const auto& m : info.maskable) {
    if (m.field != path.field) continue;
    if (m.index == path.index) return &m;
    field_match = &m;
  }
  return field_match;
}

json answer_json(const AnswerPayload& answer) {
  json j;
  if (const auto* n = std::get_if<NumberAnswer>(&answer)) {
    j["type"] = "number";
    j["value"] = n->value;
    j["unit"] = n->unit;
  } else if (const auto* m = std::get_if<MaskedParamAnswer>(&answer)) {
    j["type"] = "masked_param";
    j["path"] = m->path;
    j["value"] = m->value;
    j["unit"] = m->unit;
  } else {
    const auto& s = std::get<SymbolicAnswer>(answer);
    j["type"] = "symbolic";
    j["expression"] = s.expression;
    j["symbols"] = s.symbol_table;
  }
  return j;
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kNumeric:
      return "numeric";
    case Mode::kReverse:
      return "reverse";
    case Mode::kSymbolic:
      return "symbolic";
  }
  return "?";
}

double QAPair::numeric_value() const {
  if (const auto* n = std::get_if<NumberAnswer>(&answer)) return n->value;
  if (const auto* m = std::get_if<MaskedParamAnswer>(&answer)) return m->value;
  throw Error("symbolic answers have no single numeric value");
}

sim::Trace QaContext::resimulate(const dsl::SceneSpec& scene,
                                 double dt_override,
                                 double horizon_override) const {
  auto model = sim::compile(scene, dt_override > 0 ? dt_override : dt,
                            horizon_override > 0 ? horizon_override : horizon);
  sim::Trace tr = sim::simulate(model);
  return prune::prune_trace(tr, prune);
}

QAPair make_numeric(const sim::Trace& trace, const dsl::SceneSpec& scene,
                    const std::string& body, const std::string& quantity,
                    double t, std::uint64_t seed) {
  double value = sim::probe(trace, body, quantity, t);
  if (!std::isfinite(value)) {
    throw Error("probe produced a non-finite value");
  }
  QAPair qa;
  qa.mode = Mode::kNumeric;
  qa.template_id = static_cast<int>(splitmix64(seed) % 3);
  std::string unit = sim::quantity_unit(quantity);
  qa.question = describe_scene(scene) + " " +
                question_sentence(qa.template_id, sim::quantity_phrase(quantity),
                                  subject_phrase(body), t, unit);
  qa.answer = NumberAnswer{value, unit};
  qa.provenance = {dsl::canonical_hash_hex(scene), body, quantity, t};
  qa.scene_kinds = sorted_kinds(scene);
  qa.id = make_id(qa.provenance.scene_hash,
                  std::string("numeric|") + body + "|" + quantity + "|" +
                      format_double(t) + "|" +
                      std::to_string(qa.template_id));
  return qa;
}

QAPair make_reverse(const sim::Trace& trace, const dsl::SceneSpec& scene,
                    const dsl::ParamPath& masked, const std::string& body,
                    const std::string& quantity, double t,
                    const QaContext& ctx, std::uint64_t seed, double rel_tol) {
  const dsl::EntitySpec* entity = scene.find_entity(masked.entity);
  if (!entity) throw Error("mask path names unknown entity " + masked.entity);

  double truth = dsl::get_param(scene, masked);
  double observed = sim::probe(trace, body, quantity, t);

  // identifiability: the observation must respond monotonically and
  // appreciably to the masked parameter
  double lo_val, hi_val;
  try {
    dsl::SceneSpec lo = scene;
    dsl::set_param(lo, masked, truth * 0.9);
    lo_val = sim::probe(ctx.resimulate(lo), body, quantity, t);
    dsl::SceneSpec hi = scene;
    dsl::set_param(hi, masked, truth * 1.1);
    hi_val = sim::probe(ctx.resimulate(hi), body, quantity, t);
  } catch (const Error& e) {
    throw Error("identifiability check failed for " + masked.str() + ": " +
                e.what());
  }
  double floor = std::max(std::abs(observed), 1e-9);
  bool monotone = (hi_val - observed) * (observed - lo_val) > 0;
  double swing =
      std::min(std::abs(hi_val - observed), std::abs(observed - lo_val));
  if (!monotone || swing <= 2.0 * rel_tol * floor) {
    throw Error("parameter " + masked.str() +
                " is not identifiable from the chosen observation");
  }

  const dsl::MaskableParam* mp = find_maskable(*entity, masked);
  std::string phrase =
      mp ? mp->phrase : "the parameter " + masked.field + " of " + masked.entity;
  std::string param_unit = mp ? mp->unit : "";

  QAPair qa;
  qa.mode = Mode::kReverse;
  qa.template_id = static_cast<int>(splitmix64(seed) % 3);
  std::string unit = sim::quantity_unit(quantity);
  std::ostringstream q;
  q << describe_scene(scene, masked) << " The symbol x stands for " << phrase;
  if (!param_unit.empty()) q << " (in " << param_unit << ")";
  q << ", whose value is not given. It was observed that "
    << sim::quantity_phrase(quantity) << " of " << subject_phrase(body)
    << " at t = " << format_double(t) << " s equals " << format_double(observed);
  if (!unit.empty()) q << " " << unit;
  q << ". ";
  switch (qa.template_id) {
    case 0:
      q << "What is x?";
      break;
    case 1:
      q << "Determine x.";
      break;
    default:
      q << "Solve for x.";
      break;
  }
  qa.question = q.str();
  qa.answer = MaskedParamAnswer{masked.str(), truth, param_unit};
  qa.provenance = {dsl::canonical_hash_hex(scene), body, quantity, t};
  qa.scene_kinds = sorted_kinds(scene);
  qa.id = make_id(qa.provenance.scene_hash,
                  std::string("reverse|") + masked.str() + "|" + body + "|" +
                      quantity + "|" + format_double(t) + "|" +
                      std::to_string(qa.template_id));
  return qa;
}

QAPair make_symbolic(const dsl::SceneSpec& scene, const SymbolicForm& form,
                     const QaContext& ctx, std::uint64_t seed, int draws,
                     double rel_tol) {
  auto rng = make_rng(splitmix64(seed) ^ 0x5f3759df);
  std::uniform_real_distribution<double> factor(0.85, 1.2);

  // numeric validation against the simulator at perturbed parameter draws
  for (int d = 0; d < draws; ++d) {
    dsl::SceneSpec perturbed = scene;
    std::map<std::string, double> values;
    for (const auto& b : form.bindings) {
      if (b.path) {
        double v = b.value * factor(rng);
        dsl::set_param(perturbed, *b.path, v);
        values[b.symbol] = v;
      } else if (b.symbol == "t") {
        double horizon = form.sim_horizon > 0 ? form.sim_horizon
                         : ctx.horizon > 0    ? ctx.horizon
                                              : 10.0;
        std::uniform_real_distribution<double> tq(0.2 * horizon,
                                                  0.9 * horizon);
        values["t"] = tq(rng);
      } else {
        values[b.symbol] = b.value;
      }
    }
    sim::Trace tr;
    try {
      tr = ctx.resimulate(perturbed, form.sim_dt, form.sim_horizon);
    } catch (const Error& e) {
      throw Error("symbolic validation draw failed to simulate: " +
                  std::string(e.what()));
    }
    double measured = form.measure(perturbed, tr, values);
    double expected = form.expr->eval(values);
    if (std::abs(measured - expected) >
        rel_tol * std::max(std::abs(expected), 1e-9)) {
      throw Error("symbolic form '" + form.label +
                  "' failed numeric validation: measured " +
                  format_double(measured) + " vs expression " +
                  format_double(expected));
    }
  }

  // render the scene with bound parameters replaced by their symbols
  std::map<std::string, std::string> repl;
  SymbolicAnswer ans;
  ans.expression = form.expr->str();
  std::ostringstream symbols_clause;
  bool first = true;
  for (const auto& b : form.bindings) {
    if (b.path) repl[b.path->str()] = b.symbol;
    std::string entry = b.symbol + " (" + b.description;
    if (!b.unit.empty()) entry += ", " + b.unit;
    entry += ")";
    ans.symbol_table[b.symbol] = b.description;
    if (!first) symbols_clause << ", ";
    symbols_clause << entry;
    first = false;
  }

  QAPair qa;
  qa.mode = Mode::kSymbolic;
  qa.template_id = 0;
  qa.question = describe_scene(scene, repl) + " Treat the following as " +
                "symbols: " + symbols_clause.str() + ". " +
                form.question_clause +
                " Give a closed-form expression in these symbols.";
  qa.answer = std::move(ans);
  qa.provenance = {dsl::canonical_hash_hex(scene), form.body, form.label, 0.0};
  qa.scene_kinds = sorted_kinds(scene);
  qa.id = make_id(qa.provenance.scene_hash,
                  std::string("symbolic|") + form.label + "|" + form.body);
  return qa;
}

std::string to_jsonl(const QAPair& qa) {
  json j;
  j["id"] = qa.id;
  j["mode"] = to_string(qa.mode);
  j["question"] = qa.question;
  j["answer"] = answer_json(qa.answer);
  j["provenance"] = {{"scene_hash", qa.provenance.scene_hash},
                     {"body", qa.provenance.body},
                     {"quantity", qa.provenance.quantity},
                     {"t", qa.provenance.t}};
  j["template_id"] = qa.template_id;
  j["scene_kinds"] = qa.scene_kinds;
  j["filter_verdicts"] = qa.filter_verdicts;
  return j.dump();
}

QAPair qa_from_json(const std::string& line) {
  json j = json::parse(line);
  QAPair qa;
  qa.id = j.at("id").get<std::string>();
  std::string mode = j.at("mode").get<std::string>();
  qa.mode = mode == "numeric"   ? Mode::kNumeric
            : mode == "reverse" ? Mode::kReverse
                                : Mode::kSymbolic;
  qa.question = j.at("question").get<std::string>();
  const json& a = j.at("answer");
  std::string type = a.at("type").get<std::string>();
  if (type == "number") {
    qa.answer = NumberAnswer{a.at("value").get<double>(),
                             a.at("unit").get<std::string>()};
  } else if (type == "masked_param") {
    qa.answer = MaskedParamAnswer{a.at("path").get<std::string>(),
                                  a.at("value").get<double>(),
                                  a.at("unit").get<std::string>()};
  } else {
    SymbolicAnswer s;
    s.expression = a.at("expression").get<std::string>();
    if (a.contains("symbols")) {
      for (auto& [k, v] : a.at("symbols").items()) {
        s.symbol_table[k] = v.get<std::string>();
      }
    }
    qa.answer = std::move(s);
  }
  const json& p = j.at("provenance");
  qa.provenance = {p.at("scene_hash").get<std::string>(),
                   p.at("body").get<std::string>(),
                   p.at("quantity").get<std::string>(),
                   p.at("t").get<double>()};
  qa.template_id = j.at("template_id").get<int>();
  for (const auto& k : j.at("scene_kinds")) {
    qa.scene_kinds.push_back(k.get<std::string>());
  }
  if (j.contains("filter_verdicts")) {
    for (auto& [k, v] : j.at("filter_verdicts").items()) {
      qa.filter_verdicts[k] = v.get<bool>();
    }
  }
  return qa;
}

}  // namespace forge::qa
