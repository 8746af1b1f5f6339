#include "forge/pipeline/pipeline.hpp"

#include "forge/dsl/parse.hpp"
#include "forge/dsl/registry.hpp"
#include "forge/rng.hpp"
#include "forge/sha256.hpp"
#include "forge/sim/model.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace forge::pipeline {

namespace {

using nlohmann::json;

json range_json(const gen::Range& r) {
  return json{{"lo", r.lo},
              {"hi", r.hi},
              {"law", r.law == gen::SamplingLaw::kLogUniform ? "log_uniform"
                                                             : "uniform"}};
}

// Per-scene QA generation output, merged deterministically afterwards.
struct SceneWork {
  std::string hash;
  dsl::SceneSpec scene;
  sim::Trace trace;
  std::vector<filter::AblationVariant> variants;
  std::vector<qa::QAPair> pairs;
  int pruned_rejected = 0;
  std::string error;
};

std::uint64_t hash64(const std::string& hex) {
  std::uint64_t h = 0;
  for (char c : hex.substr(0, 16)) {
    h = h * 16 + (c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return h;
}

void generate_scene_pairs(SceneWork& work, const PipelineConfig& cfg,
                          const qa::QaContext& ctx) {
  auto rng = make_rng(derive_seed(cfg.seed, hash64(work.hash)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const sim::Trace& tr = work.trace;
  double t_end = tr.duration();
  double t_lo = cfg.qa.t_lo_frac * t_end;
  double t_hi = cfg.qa.t_hi_frac * t_end;

  // eligible (body, quantity) probes: skip series that never change, whose
  // answers restate scene constants
  std::vector<std::pair<std::string, std::string>> probes;
  auto consider = [&](const std::string& body) {
    for (const auto& q : sim::probe_quantities(tr, body)) {
      double v0 = sim::probe(tr, body, q, tr.times.front());
      double v1 = sim::probe(tr, body, q, t_end);
      double vm = sim::probe(tr, body, q, 0.5 * (t_lo + t_hi));
      double scale = std::max({std::abs(v0), std::abs(v1), std::abs(vm)});
      if (scale > 1e-12 &&
          (std::abs(v1 - v0) > 1e-9 * scale ||
           std::abs(vm - v0) > 1e-9 * scale)) {
        probes.emplace_back(body, q);
      }
    }
  };
  for (const auto& b : tr.bodies) consider(b.name);
  for (const auto& s : tr.strings) consider(s.name);
  for (const auto& c : tr.contacts) consider(c.name);
  consider("system");

  auto draw_t = [&] {
    double t = t_lo + (t_hi - t_lo) * unit(rng);
    return std::min(t, t_end);
  };

  if (cfg.qa.numeric && !probes.empty()) {
    for (int i = 0; i < cfg.qa.numeric_per_scene; ++i) {
      const auto& [body, quantity] =
          probes[static_cast<std::size_t>(unit(rng) * probes.size()) %
                 probes.size()];
      try {
        work.pairs.push_back(qa::make_numeric(
            tr, work.scene, body, quantity, draw_t(), rng()));
      } catch (const Error&) {
        // probe landed outside the stable prefix; drop this draw
      }
    }
  }

  if (cfg.qa.reverse && !probes.empty()) {
    // candidate maskable parameters present in this scene
    std::vector<dsl::ParamPath> masks;
    for (const auto& e : work.scene.entities) {
      for (const auto& m : dsl::entity_info(e.kind).maskable) {
        if (!e.params.count(m.field)) continue;
        const auto& pv = e.params.at(m.field);
        if (m.index >= 0) {
          if (!pv.is_list() ||
              m.index >= static_cast<int>(pv.list().size())) {
            continue;
          }
        } else if (!pv.is_number()) {
          continue;
        }
        masks.push_back({e.name, m.field, m.index});
      }
    }
    int made = 0;
    for (int attempt = 0;
         attempt < 4 * cfg.qa.reverse_per_scene && made < cfg.qa.reverse_per_scene && !masks.empty();
         ++attempt) {
      const auto& mask =
          masks[static_cast<std::size_t>(unit(rng) * masks.size()) %
                masks.size()];
      const auto& [body, quantity] =
          probes[static_cast<std::size_t>(unit(rng) * probes.size()) %
                 probes.size()];
      try {
        work.pairs.push_back(qa::make_reverse(tr, work.scene, mask, body,
                                              quantity, draw_t(), ctx, rng(),
                                              cfg.filter.tol));
        ++made;
      } catch (const Error&) {
        // not identifiable from this observation; try another draw
      }
    }
  }

  if (cfg.qa.symbolic) {
    auto forms = qa::symbolic_forms(work.scene);
    int made = 0;
    for (const auto& form : forms) {
      if (made >= cfg.qa.symbolic_per_scene) break;
      try {
        work.pairs.push_back(
            qa::make_symbolic(work.scene, form, ctx, rng()));
        ++made;
      } catch (const Error&) {
        // validation failure: leave a note but never emit the pair
      }
    }
  }
}

void process_scene(SceneWork& work, const PipelineConfig& cfg,
                   const qa::QaContext& ctx, bool want_variants) {
  try {
    work.hash = dsl::canonical_hash_hex(work.scene);
    auto model = sim::compile(work.scene, cfg.dt, cfg.horizon);
    sim::Trace raw = sim::simulate(model);
    try {
      work.trace = prune::prune_trace(raw, cfg.prune);
    } catch (const ValidationError&) {
      work.pruned_rejected = 1;
      work.error = "trace rejected: unstable from the start";
      return;
    }
    generate_scene_pairs(work, cfg, ctx);
    if (want_variants && !work.pairs.empty()) {
      work.variants = filter::enumerate_ablations(work.scene, ctx);
    }
  } catch (const std::exception& e) {
    work.error = e.what();
    work.pairs.clear();
  }
}

}  // namespace

void PipelineConfig::validate() const {
  gen.validate();
  prune.validate();
  if (!qa.numeric && !qa.reverse && !qa.symbolic) {
    throw ValidationError("at least one QA mode must be enabled");
  }
  if (shard_size < 1) throw ValidationError("shard_size must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (!(qa.t_lo_frac >= 0 && qa.t_lo_frac < qa.t_hi_frac &&
        qa.t_hi_frac <= 1.0)) {
    throw ValidationError("timestep policy needs 0 <= lo < hi <= 1");
  }
}

std::string PipelineConfig::canonical_json() const {
  json j;
  j["seed"] = seed;
  json g;
  g["entity_count"] = {gen.entity_count_min, gen.entity_count_max};
  std::vector<std::string> kinds;
  for (auto k : gen.allowed_entity_kinds) {
    kinds.push_back(dsl::to_string(k));
  }
  std::sort(kinds.begin(), kinds.end());
  g["allowed_entity_kinds"] = kinds;
  g["max_attempts"] = gen.max_attempts;
  g["extra_connection_probability"] = gen.extra_connection_probability;
  json ranges;
  for (const auto& [key, r] : gen.parameter_ranges) {
    ranges[key] = range_json(r);
  }
  g["parameter_ranges"] = ranges;
  j["gen"] = g;
  j["dt"] = dt;
  j["horizon"] = horizon;
  j["prune"] = {{"window", prune.window},
                {"threshold", prune.threshold},
                {"min_keep", prune.min_keep},
                {"epsilon", prune.epsilon}};
  j["qa"] = {{"numeric", qa.numeric},
             {"reverse", qa.reverse},
             {"symbolic", qa.symbolic},
             {"numeric_per_scene", qa.numeric_per_scene},
             {"reverse_per_scene", qa.reverse_per_scene},
             {"symbolic_per_scene", qa.symbolic_per_scene},
             {"t_lo_frac", qa.t_lo_frac},
             {"t_hi_frac", qa.t_hi_frac}};
  j["filter"] = {{"tol", filter.tol},
                 {"dedup", filter.dedup},
                 {"shortcut", filter.shortcut}};
  j["shard_size"] = shard_size;
  return j.dump();
}

PipelineConfig parse_config(const std::string& yaml_text) {
  PipelineConfig cfg;
  YAML::Node root = YAML::Load(yaml_text);
  if (!root.IsMap()) return cfg;

  auto known = [&](const YAML::Node& node,
                   std::initializer_list<const char*> keys,
                   const char* where) {
    for (const auto& kv : node) {
      std::string k = kv.first.as<std::string>();
      if (!std::any_of(keys.begin(), keys.end(),
                       [&](const char* a) { return k == a; })) {
        throw ParseError(std::string(where) + ": unknown config key '" + k +
                         "'");
      }
    }
  };
  known(root, {"seed", "gen", "dt", "horizon", "prune", "qa", "filter",
               "shard_size", "workers"},
        "config");

  if (root["seed"]) cfg.seed = root["seed"].as<std::uint64_t>();
  if (root["dt"]) cfg.dt = root["dt"].as<double>();
  if (root["horizon"]) cfg.horizon = root["horizon"].as<double>();
  if (root["shard_size"]) cfg.shard_size = root["shard_size"].as<int>();
  if (root["workers"]) cfg.workers = root["workers"].as<int>();

  if (root["gen"]) {
    const YAML::Node& g = root["gen"];
    known(g, {"entity_count", "allowed_entity_kinds", "max_attempts",
              "extra_connection_probability", "parameter_ranges"},
          "gen");
    if (g["entity_count"]) {
      cfg.gen.entity_count_min = g["entity_count"][0].as<int>();
      cfg.gen.entity_count_max = g["entity_count"][1].as<int>();
    }
    if (g["allowed_entity_kinds"]) {
      for (const auto& k : g["allowed_entity_kinds"]) {
        auto kind = dsl::entity_kind_from_name(k.as<std::string>());
        if (!kind) {
          throw ParseError("unknown entity kind '" + k.as<std::string>() +
                           "' in config");
        }
        cfg.gen.allowed_entity_kinds.insert(*kind);
      }
    }
    if (g["max_attempts"]) cfg.gen.max_attempts = g["max_attempts"].as<int>();
    if (g["extra_connection_probability"]) {
      cfg.gen.extra_connection_probability =
          g["extra_connection_probability"].as<double>();
    }
    if (g["parameter_ranges"]) {
      for (const auto& kv : g["parameter_ranges"]) {
        gen::Range r;
        const YAML::Node& rn = kv.second;
        r.lo = rn["lo"].as<double>();
        r.hi = rn["hi"].as<double>();
        if (rn["law"]) {
          std::string law = rn["law"].as<std::string>();
          r.law = law == "log_uniform" ? gen::SamplingLaw::kLogUniform
                                       : gen::SamplingLaw::kUniform;
        }
        cfg.gen.parameter_ranges[kv.first.as<std::string>()] = r;
      }
    }
  }

  if (root["prune"]) {
    const YAML::Node& p = root["prune"];
    known(p, {"window", "threshold", "min_keep", "epsilon"}, "prune");
    if (p["window"]) cfg.prune.window = p["window"].as<std::size_t>();
    if (p["threshold"]) cfg.prune.threshold = p["threshold"].as<double>();
    if (p["min_keep"]) cfg.prune.min_keep = p["min_keep"].as<std::size_t>();
    if (p["epsilon"]) cfg.prune.epsilon = p["epsilon"].as<double>();
  }

  if (root["qa"]) {
    const YAML::Node& q = root["qa"];
    known(q, {"modes", "numeric_per_scene", "reverse_per_scene",
              "symbolic_per_scene", "t_lo_frac", "t_hi_frac"},
          "qa");
    if (q["modes"]) {
      cfg.qa.numeric = cfg.qa.reverse = cfg.qa.symbolic = false;
      for (const auto& m : q["modes"]) {
        std::string mode = m.as<std::string>();
        if (mode == "numeric") {
          cfg.qa.numeric = true;
        } else if (mode == "reverse") {
          cfg.qa.reverse = true;
        } else if (mode == "symbolic") {
          cfg.qa.symbolic = true;
        } else {
          throw ParseError("unknown QA mode '" + mode + "'");
        }
      }
    }
    if (q["numeric_per_scene"]) {
      cfg.qa.numeric_per_scene = q["numeric_per_scene"].as<int>();
    }
    if (q["reverse_per_scene"]) {
      cfg.qa.reverse_per_scene = q["reverse_per_scene"].as<int>();
    }
    if (q["symbolic_per_scene"]) {
      cfg.qa.symbolic_per_scene = q["symbolic_per_scene"].as<int>();
    }
    if (q["t_lo_frac"]) cfg.qa.t_lo_frac = q["t_lo_frac"].as<double>();
    if (q["t_hi_frac"]) cfg.qa.t_hi_frac = q["t_hi_frac"].as<double>();
  }

  if (root["filter"]) {
    const YAML::Node& f = root["filter"];
    known(f, {"tol", "dedup", "shortcut"}, "filter");
    if (f["tol"]) cfg.filter.tol = f["tol"].as<double>();
    if (f["dedup"]) cfg.filter.dedup = f["dedup"].as<bool>();
    if (f["shortcut"]) cfg.filter.shortcut = f["shortcut"].as<bool>();
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

GenerateResult run_generate(const PipelineConfig& cfg, int count,
                            const std::string& out_dir) {
  cfg.validate();
  if (count < 1) throw ValidationError("count must be >= 1");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  GenerateResult result;
  qa::QaContext ctx{cfg.dt, cfg.horizon, cfg.prune};

  int per_scene = (cfg.qa.numeric ? cfg.qa.numeric_per_scene : 0) +
                  (cfg.qa.reverse ? cfg.qa.reverse_per_scene : 0) +
                  (cfg.qa.symbolic ? cfg.qa.symbolic_per_scene : 0);
  per_scene = std::max(per_scene, 1);
  int scene_count = (count + per_scene - 1) / per_scene;
  scene_count += scene_count / 4 + 2;  // headroom for failed/short scenes

  gen::GenConfig gencfg = cfg.gen;
  gencfg.rng_seed = cfg.seed;
  result.counts.scenes_requested = scene_count;
  auto scenes = gen::generate_batch(gencfg, scene_count);

  std::vector<SceneWork> works(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    works[i].scene = std::move(scenes[i]);
  }

  // deterministic parallelism: scene work is independent, merge is sorted
  bool want_variants = cfg.filter.shortcut;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= works.size()) return;
      process_scene(works[i], cfg, ctx, want_variants);
    }
  };
  if (cfg.workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // merge in scene-hash order so worker scheduling cannot reorder output
  std::sort(works.begin(), works.end(),
            [](const SceneWork& a, const SceneWork& b) {
              return a.hash < b.hash;
            });

  std::vector<qa::QAPair> pairs;
  std::map<std::string, filter::SceneBundle> bundles;
  for (auto& w : works) {
    result.counts.scenes_generated++;
    if (!w.error.empty()) {
      result.counts.scenes_failed++;
      result.counts.pruned_rejected += w.pruned_rejected;
      if (result.errors.size() < 32) {
        result.errors.push_back(w.hash.substr(0, 12) + ": " + w.error);
      }
      continue;
    }
    for (auto& p : w.pairs) {
      if (static_cast<int>(pairs.size()) >= count) break;
      switch (p.mode) {
        case qa::Mode::kNumeric:
          result.counts.qa_numeric++;
          break;
        case qa::Mode::kReverse:
          result.counts.qa_reverse++;
          break;
        case qa::Mode::kSymbolic:
          result.counts.qa_symbolic++;
          break;
      }
      pairs.push_back(std::move(p));
    }
    bundles[w.hash] = filter::SceneBundle{w.scene, &w.trace, &w.variants};
    if (static_cast<int>(pairs.size()) >= count) break;
  }
  result.counts.qa_generated = static_cast<int>(pairs.size());

  auto filtered = filter::filter_corpus(std::move(pairs), bundles,
                                        cfg.filter.tol, cfg.filter.dedup);
  if (!cfg.filter.shortcut) {
    // shortcut filtering disabled: everything that passed dedup stays
  }
  result.counts.duplicates_removed = filtered.stats.duplicates;
  result.counts.shortcuts_removed = filtered.stats.shortcuts;
  result.counts.kept = filtered.stats.kept;
  result.discard_fraction = filtered.stats.discard_fraction();

  // shards, named by content hash
  std::vector<json> shard_meta;
  std::vector<std::string> lines;
  lines.reserve(filtered.kept.size());
  for (const auto& qa : filtered.kept) lines.push_back(qa::to_jsonl(qa));

  for (std::size_t start = 0; start < lines.size();
       start += static_cast<std::size_t>(cfg.shard_size)) {
    std::size_t end = std::min(lines.size(),
                               start + static_cast<std::size_t>(cfg.shard_size));
    std::string blob;
    for (std::size_t i = start; i < end; ++i) blob += lines[i] + "\n";
    std::string digest = sha256_hex(blob).substr(0, 12);
    std::string fname = "corpus-" +
                        std::to_string(start / cfg.shard_size) + "-" + digest +
                        ".jsonl";
    std::ofstream out(fs::path(out_dir) / fname, std::ios::binary);
    out << blob;
    shard_meta.push_back(json{{"file", fname},
                              {"sha256", sha256_hex(blob)},
                              {"count", end - start}});
    result.shard_files.push_back(fname);
  }
  if (lines.empty()) {
    // an empty corpus still gets a manifest for accounting
  }

  // discard log
  {
    std::string blob;
    for (const auto& d : filtered.log) {
      json j{{"id", d.id},
             {"reason", d.reason},
             {"witness", d.witness},
             {"delta", d.delta}};
      blob += j.dump() + "\n";
    }
    std::ofstream out(fs::path(out_dir) / "discards.jsonl", std::ios::binary);
    out << blob;
  }

  json manifest;
  manifest["schema_version"] = 1;
  manifest["config"] = json::parse(cfg.canonical_json());
  manifest["config_hash"] = sha256_hex(cfg.canonical_json());
  manifest["seed"] = cfg.seed;
  manifest["counts"] = {
      {"scenes_requested", result.counts.scenes_requested},
      {"scenes_generated", result.counts.scenes_generated},
      {"scenes_failed", result.counts.scenes_failed},
      {"pruned_rejected", result.counts.pruned_rejected},
      {"qa_numeric", result.counts.qa_numeric},
      {"qa_reverse", result.counts.qa_reverse},
      {"qa_symbolic", result.counts.qa_symbolic},
      {"qa_generated", result.counts.qa_generated},
      {"duplicates_removed", result.counts.duplicates_removed},
      {"shortcuts_removed", result.counts.shortcuts_removed},
      {"kept", result.counts.kept}};
  manifest["discard_fraction"] = result.discard_fraction;
  manifest["shards"] = shard_meta;
  manifest["errors"] = result.errors;
  std::string manifest_text = manifest.dump(2) + "\n";
  result.manifest_hash = sha256_hex(manifest_text);

  result.manifest_path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream mout(result.manifest_path, std::ios::binary);
  mout << manifest_text;
  return result;
}

}  // namespace forge::pipeline
