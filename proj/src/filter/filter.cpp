#include "forge/filter/filter.hpp"

#include "forge/dsl/parse.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace forge::filter {

namespace {

// connectivity of the entity graph after removing `removed`
bool still_connected(const dsl::SceneSpec& scene, const std::string& removed) {
  std::vector<std::string> nodes;
  for (const auto& e : scene.entities) {
    if (e.name != removed) nodes.push_back(e.name);
  }
  if (nodes.empty()) return false;
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    index[nodes[i]] = static_cast<int>(i);
  }
  std::vector<int> parent(nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& c : scene.connections) {
    if (c.a.entity == removed || c.b.entity == removed) continue;
    parent[find(index.at(c.a.entity))] = find(index.at(c.b.entity));
  }
  int root = find(0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (find(static_cast<int>(i)) != root) return false;
  }
  return true;
}

dsl::SceneSpec remove_entity(const dsl::SceneSpec& scene,
                             const std::string& name) {
  dsl::SceneSpec out = scene;
  out.entities.erase(
      std::remove_if(out.entities.begin(), out.entities.end(),
                     [&](const dsl::EntitySpec& e) { return e.name == name; }),
      out.entities.end());
  out.connections.erase(
      std::remove_if(out.connections.begin(), out.connections.end(),
                     [&](const dsl::Connection& c) {
                       return c.a.entity == name || c.b.entity == name;
                     }),
      out.connections.end());
  out.name = scene.name + " [without " + name + "]";
  return out;
}

}  // namespace

sim::CompiledModel compile_with_weld(const dsl::SceneSpec& scene,
                                     const std::string& joint_id, double dt,
                                     double horizon) {
  sim::CompiledModel model = sim::compile(scene, dt, horizon);
  for (const auto& joint : model.joints) {
    if (joint.id == joint_id) {
      model.weld_rows = joint.rows;
      return model;
    }
  }
  throw Error("no glueable joint '" + joint_id + "' in scene");
}

std::vector<AblationVariant> enumerate_ablations(const dsl::SceneSpec& scene,
                                                 const qa::QaContext& ctx) {
  std::vector<AblationVariant> out;

  if (scene.entities.size() > 1) {
    for (const auto& e : scene.entities) {
      if (!still_connected(scene, e.name)) continue;
      AblationVariant v;
      v.kind = "entity_removal";
      v.target = e.name;
      v.scene = remove_entity(scene, e.name);
      try {
        v.trace = ctx.resimulate(v.scene);
      } catch (const Error&) {
        continue;  // unstable or unsimulatable variant
      }
      out.push_back(std::move(v));
    }
  }

  // joint welds, enumerated from the compiled joint list
  std::vector<std::string> joint_ids;
  {
    sim::CompiledModel model = sim::compile(scene, ctx.dt, ctx.horizon);
    for (const auto& j : model.joints) joint_ids.push_back(j.id);
  }
  for (const auto& id : joint_ids) {
    AblationVariant v;
    v.kind = "joint_glue";
    v.target = id;
    v.scene = scene;
    try {
      sim::CompiledModel model =
          compile_with_weld(scene, id, ctx.dt, ctx.horizon);
      v.trace = prune::prune_trace(sim::simulate(model), ctx.prune);
    } catch (const Error&) {
      continue;
    }
    out.push_back(std::move(v));
  }
  return out;
}

ShortcutVerdict is_shortcut(const qa::QAPair& qa, double original_value,
                            const std::vector<AblationVariant>& variants,
                            double tol) {
  ShortcutVerdict verdict;
  const auto& prov = qa.provenance;
  for (const auto& v : variants) {
    double value;
    try {
      value = sim::probe(v.trace, prov.body, prov.quantity, prov.t);
    } catch (const Error&) {
      continue;  // body gone or trace truncated before t: cannot witness
    }
    double delta = std::abs(value - original_value);
    if (delta <= tol * std::max(std::abs(original_value), 1e-9)) {
      verdict.shortcut = true;
      verdict.witness = v.kind + ":" + v.target;
      verdict.variant_value = value;
      verdict.delta = delta;
      return verdict;
    }
  }
  return verdict;
}

FilterResult filter_corpus(std::vector<qa::QAPair> pairs,
                           const std::map<std::string, SceneBundle>& scenes,
                           double tol, bool dedup) {
  FilterResult res;
  res.stats.total_in = static_cast<int>(pairs.size());

  // deterministic processing order regardless of input order
  std::sort(pairs.begin(), pairs.end(),
            [](const qa::QAPair& a, const qa::QAPair& b) {
              return std::pair(a.provenance.scene_hash, a.id) <
                     std::pair(b.provenance.scene_hash, b.id);
            });

  std::set<std::string> seen;
  for (auto& qa : pairs) {
    if (dedup) {
      double rounded_t = std::round(qa.provenance.t * 10.0) / 10.0;
      std::string key = qa.provenance.scene_hash + "|" +
                        std::to_string(qa.template_id) + "|" +
                        std::string(to_string(qa.mode)) + "|" +
                        qa.provenance.body + "|" + qa.provenance.quantity +
                        "|" + format_double(rounded_t);
      if (!seen.insert(key).second) {
        qa.filter_verdicts["dedup"] = false;
        res.log.push_back({qa.id, "duplicate", "", 0.0});
        res.stats.duplicates++;
        res.discarded.push_back(std::move(qa));
        continue;
      }
      qa.filter_verdicts["dedup"] = true;
    }

    if (qa.mode == qa::Mode::kSymbolic) {
      // expression answers have no probe to compare; they bypass ablation
      qa.filter_verdicts["shortcut"] = true;
      res.stats.symbolic_bypassed++;
      res.stats.kept++;
      res.kept.push_back(std::move(qa));
      continue;
    }

    auto bundle = scenes.find(qa.provenance.scene_hash);
    if (bundle == scenes.end() || !bundle->second.variants ||
        !bundle->second.trace) {
      res.stats.kept++;
      res.kept.push_back(std::move(qa));
      continue;
    }

    double original;
    try {
      original = sim::probe(*bundle->second.trace, qa.provenance.body,
                            qa.provenance.quantity, qa.provenance.t);
    } catch (const Error&) {
      res.stats.kept++;
      res.kept.push_back(std::move(qa));
      continue;
    }

    ShortcutVerdict v =
        is_shortcut(qa, original, *bundle->second.variants, tol);
    qa.filter_verdicts["shortcut"] = !v.shortcut;
    if (v.shortcut) {
      res.log.push_back({qa.id, "shortcut", v.witness, v.delta});
      res.stats.shortcuts++;
      res.discarded.push_back(std::move(qa));
    } else {
      res.stats.kept++;
      res.kept.push_back(std::move(qa));
    }
  }
  return res;
}

}  // namespace forge::filter
