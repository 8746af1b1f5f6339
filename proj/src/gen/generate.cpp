#include "forge/gen/generate.hpp"

#include "forge/dsl/parse.hpp"
#include "forge/dsl/registry.hpp"
#include "forge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace forge::gen {

namespace {

using dsl::EntityKind;
using dsl::EntitySpec;
using dsl::ParamValue;
using dsl::SceneSpec;

constexpr double kDeg = std::numbers::pi / 180.0;

class Sampler {
 public:
  Sampler(const GenConfig& cfg, std::mt19937_64& rng) : cfg_(cfg), rng_(rng) {}

  double draw(const std::string& key) {
    Range r = range(key);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng_);
    if (r.law == SamplingLaw::kLogUniform) {
      return r.lo * std::pow(r.hi / r.lo, x);
    }
    return r.lo + (r.hi - r.lo) * x;
  }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng_);
  }

  int pick(int lo, int hi) {  // inclusive
    std::uniform_int_distribution<int> u(lo, hi);
    return u(rng_);
  }

  bool chance(double p) { return uniform(0.0, 1.0) < p; }

  std::vector<double> draw_list(const std::string& key, int n) {
    std::vector<double> out(n);
    for (auto& v : out) v = draw(key);
    return out;
  }

  Range range(const std::string& key) const {
    auto it = cfg_.parameter_ranges.find(key);
    return it != cfg_.parameter_ranges.end() ? it->second
                                             : default_range(key);
  }

 private:
  const GenConfig& cfg_;
  std::mt19937_64& rng_;
};

// Kinds that expose connection ports; only these can appear in multi-entity
// scenes.
bool connectable(EntityKind kind) {
  switch (kind) {
    case EntityKind::kMassWithFixedPulley:
    case EntityKind::kMassWithMovablePulley:
    case EntityKind::kMassWithReverseMovablePulley:
    case EntityKind::kTwoSideMassPlane:
    case EntityKind::kStackedMassPlane:
    case EntityKind::kDirectedMass:
      return true;
    default:
      return false;
  }
}

void sample_params(EntityKind kind, EntitySpec& e, Sampler& s) {
  using PV = ParamValue;
  switch (kind) {
    case EntityKind::kMassWithFixedPulley: {
      int variant = s.pick(0, 9);
      if (variant < 6) {
        e.params["mass_type"] = PV(std::string("Mass"));
        e.params["mass_values"] = PV(s.draw_list("mass", 1));
      } else if (variant < 8) {
        e.params["mass_type"] = PV(std::string("MassChain"));
        e.params["mass_values"] = PV(s.draw_list("mass", 2));
      } else {
        e.params["mass_type"] = PV(std::string("SpringMass"));
        e.params["mass_values"] = PV(s.draw_list("mass", 1));
        e.params["spring_constant"] = PV(s.draw("spring_constant"));
      }
      e.params["pulley_mass"] = PV(s.draw("pulley_mass"));
      break;
    }
    case EntityKind::kMassWithMovablePulley:
    case EntityKind::kMassWithReverseMovablePulley:
      e.params["mass_values"] = PV(s.draw_list("mass", 2));
      e.params["pulley_mass"] = PV(s.draw("pulley_mass"));
      break;
    case EntityKind::kTwoSideMassPlane:
      e.params["mass"] = PV(s.draw("mass"));
      e.params["incline_angle"] = PV(s.draw("incline_angle"));
      e.params["friction_coefficient"] =
          PV(s.chance(0.4) ? 0.0 : s.draw("friction"));
      e.params["face_length"] = PV(30.0);
      break;
    case EntityKind::kStackedMassPlane: {
      int n = s.pick(1, 3);
      e.params["masses"] = PV(s.draw_list("mass", n));
      std::vector<double> mus(n);
      for (auto& mu : mus) mu = s.draw("friction");
      e.params["friction_coefficients"] = PV(mus);
      std::vector<double> v0(n, 0.0);
      v0.back() = s.uniform(-2.0, 2.0);
      e.params["initial_velocities"] = PV(v0);
      break;
    }
    case EntityKind::kDirectedMass:
      e.params["mass"] = PV(s.draw("mass"));
      break;
    case EntityKind::kMassPrismPlane: {
      e.params["wedge_mass"] = PV(s.draw("mass"));
      e.params["left_angle"] = PV(s.draw("incline_angle"));
      e.params["right_angle"] = PV(s.draw("incline_angle"));
      int layout = s.pick(0, 9);
      if (layout < 7) {
        e.params["left_mass"] = PV(s.draw("mass"));
        e.params["right_mass"] = PV(s.draw("mass"));
      } else if (layout < 9) {
        e.params["right_mass"] = PV(s.draw("mass"));
      } else {
        e.params["left_mass"] = PV(s.draw("mass"));
      }
      e.params["friction_coefficient"] =
          PV(s.chance(0.5) ? 0.0 : s.draw("friction"));
      e.params["face_length"] = PV(20.0);
      break;
    }
    case EntityKind::kMassBoxPlane:
      e.params["box_mass"] = PV(s.draw("mass"));
      e.params["top_mass"] = PV(s.draw("mass"));
      e.params["side_mass"] = PV(s.draw("mass"));
      e.params["friction_coefficient"] =
          PV(s.chance(0.5) ? 0.0 : s.draw("friction"));
      break;
    case EntityKind::kTwoDCollisionPlane: {
      int n = s.pick(2, 3);
      e.params["masses"] = PV(s.draw_list("mass", n));
      std::vector<double> radii(n), pos(2 * n), vel(2 * n);
      for (auto& r : radii) r = s.uniform(0.1, 0.3);
      for (int i = 0; i < n; ++i) {
        pos[2 * i] = -4.0 + 4.0 * i;  // spread along x, no overlap
        pos[2 * i + 1] = s.uniform(-0.2, 0.2);
        vel[2 * i] = s.uniform(-3.0, 3.0);
        vel[2 * i + 1] = s.uniform(-1.0, 1.0);
      }
      e.params["radii"] = PV(radii);
      e.params["initial_positions"] = PV(pos);
      e.params["initial_velocities"] = PV(vel);
      e.params["restitution"] = PV(s.draw("restitution"));
      break;
    }
    case EntityKind::kComplexCollisionPlane: {
      int n = s.pick(2, 4);
      std::string types;
      std::vector<double> masses(n), sizes(n), pos(n), vel(n);
      for (int i = 0; i < n; ++i) {
        int t = s.pick(0, 9);
        bool last = i == n - 1;
        std::string kind = t < 4           ? "block"
                           : t < 7         ? "sphere"
                           : (t < 9 || !last) ? "spring_block"
                                           : "wall";
        if (!types.empty()) types += " ";
        types += kind;
        masses[i] = s.draw("mass");
        sizes[i] = s.uniform(0.15, 0.35);
        pos[i] = -4.0 + 3.0 * i;
        vel[i] = kind == "wall" ? 0.0 : s.uniform(-3.0, 3.0);
      }
      e.params["object_types"] = PV(types);
      e.params["masses"] = PV(masses);
      e.params["sizes"] = PV(sizes);
      e.params["initial_positions"] = PV(pos);
      e.params["initial_velocities"] = PV(vel);
      e.params["restitution"] = PV(s.draw("restitution"));
      break;
    }
    case EntityKind::kSolarSystem: {
      int n = s.pick(1, 3);
      e.params["star_mass"] = PV(s.draw("star_mass"));
      e.params["planet_masses"] = PV(s.draw_list("planet_mass", n));
      std::vector<double> radii(n), factors(n);
      for (int i = 0; i < n; ++i) {
        radii[i] = s.draw("orbit_radius") * (1.0 + 0.9 * i);
        factors[i] = s.uniform(0.85, 1.15);
      }
      e.params["orbit_radii"] = PV(radii);
      e.params["speed_factors"] = PV(factors);
      break;
    }
    case EntityKind::kRocketEntity: {
      double m0 = s.draw("rocket_mass");
      double surface_g = s.uniform(1.0, 15.0);
      double radius = s.uniform(1e6, 5e6);
      e.params["initial_mass"] = PV(m0);
      e.params["dry_mass"] = PV(m0 * s.uniform(0.3, 0.7));
      e.params["burn_rate"] = PV(m0 * s.uniform(0.02, 0.1));
      e.params["exhaust_speed"] = PV(s.uniform(1500.0, 4000.0));
      e.params["planet_radius"] = PV(radius);
      e.params["planet_mass"] =
          PV(surface_g * radius * radius / kGravitationalConstant);
      break;
    }
    case EntityKind::kRotationEntity: {
      int n = s.pick(1, 3);
      static const char* shapes[] = {"bar", "sphere", "cylinder", "disc",
                                     "hemisphere"};
      std::string types;
      std::vector<double> masses(n), sizes(n), offsets(n);
      for (int i = 0; i < n; ++i) {
        const char* shape = shapes[s.pick(0, 4)];
        if (!types.empty()) types += " ";
        types += shape;
        masses[i] = s.draw("mass");
        sizes[i] = s.uniform(0.1, 1.0);
        offsets[i] = 0.3 + 0.6 * i + s.uniform(0.0, 0.3);
      }
      e.params["shape_types"] = PV(types);
      e.params["shape_masses"] = PV(masses);
      e.params["shape_sizes"] = PV(sizes);
      e.params["shape_offsets"] = PV(offsets);
      e.params["initial_angle"] = PV(s.uniform(0.1, 1.2));
      break;
    }
    case EntityKind::kRollingEntity: {
      static const char* shapes[] = {"sphere", "cylinder", "disc",
                                     "hollow_sphere", "hollow_cylinder"};
      std::string shape = shapes[s.pick(0, 4)];
      double r = s.uniform(0.1, 0.6);
      e.params["shape_type"] = PV(shape);
      e.params["mass"] = PV(s.draw("mass"));
      e.params["radius"] = PV(r);
      if (shape == "hollow_sphere" || shape == "hollow_cylinder") {
        e.params["inner_radius"] = PV(r * s.uniform(0.3, 0.9));
      }
      e.params["incline_angle"] = PV(s.draw("incline_angle"));
      e.params["incline_length"] = PV(60.0);
      break;
    }
    case EntityKind::kEmEntity: {
      bool charged = s.chance(0.6);
      e.params["mass"] = PV(s.uniform(0.1, 5.0));
      e.params["charge"] = PV(charged ? s.uniform(-2.0, 2.0) : 0.0);
      std::vector<double> v0 = {s.uniform(-5.0, 5.0), s.uniform(-5.0, 5.0),
                                s.uniform(0.0, 8.0)};
      e.params["initial_velocity"] = PV(v0);
      if (charged) {
        e.params["electric_field"] =
            PV(std::vector<double>{s.uniform(-20.0, 20.0), 0.0,
                                   s.uniform(-20.0, 20.0)});
        e.params["magnetic_field"] =
            PV(std::vector<double>{0.0, s.uniform(-2.0, 2.0),
                                   s.uniform(-2.0, 2.0)});
      }
      break;
    }
  }
}

struct FreePort {
  std::string entity;
  std::string port;
  dsl::PortType type;
};

}  // namespace

void GenConfig::validate() const {
  if (entity_count_min < 1 || entity_count_max < entity_count_min) {
    throw ValidationError("entity count range must satisfy 1 <= min <= max");
  }
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  for (const auto& [key, r] : parameter_ranges) {
    if (!(r.lo <= r.hi)) {
      throw ValidationError("empty range for '" + key + "'");
    }
    if (r.law == SamplingLaw::kLogUniform && r.lo <= 0) {
      throw ValidationError("log-uniform range for '" + key +
                            "' needs lo > 0");
    }
  }
}

Range default_range(const std::string& key) {
  if (key == "mass") return {0.1, 100.0, SamplingLaw::kLogUniform};
  if (key == "pulley_mass") return {0.2, 5.0, SamplingLaw::kLogUniform};
  if (key == "incline_angle") return {10.0 * kDeg, 80.0 * kDeg,
                                      SamplingLaw::kUniform};
  if (key == "friction") return {0.0, 0.8, SamplingLaw::kUniform};
  if (key == "restitution") return {0.3, 1.0, SamplingLaw::kUniform};
  if (key == "spring_constant") return {20.0, 500.0, SamplingLaw::kLogUniform};
  if (key == "star_mass") return {1e29, 3e30, SamplingLaw::kLogUniform};
  if (key == "planet_mass") return {1e22, 1e27, SamplingLaw::kLogUniform};
  if (key == "orbit_radius") return {5e10, 4e11, SamplingLaw::kLogUniform};
  if (key == "rocket_mass") return {1e3, 1e5, SamplingLaw::kLogUniform};
  return {0.1, 10.0, SamplingLaw::kUniform};
}

dsl::SceneSpec generate_scene(const GenConfig& cfg) {
  cfg.validate();
  auto rng = make_rng(cfg.rng_seed);
  Sampler s(cfg, rng);

  std::vector<EntityKind> all_kinds;
  for (const auto& info : dsl::entity_catalog()) {
    if (cfg.allowed_entity_kinds.empty() ||
        cfg.allowed_entity_kinds.count(info.kind)) {
      all_kinds.push_back(info.kind);
    }
  }
  if (all_kinds.empty()) {
    throw ValidationError("allowed_entity_kinds selects no known kind");
  }
  std::vector<EntityKind> linkable;
  for (auto k : all_kinds) {
    if (connectable(k)) linkable.push_back(k);
  }

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    int count = s.pick(cfg.entity_count_min, cfg.entity_count_max);
    const auto& pool = count > 1 ? linkable : all_kinds;
    if (pool.empty()) {
      count = 1;
    }
    const auto& kinds = count > 1 ? linkable : all_kinds;

    SceneSpec scene;
    scene.rng_seed = cfg.rng_seed;
    std::vector<FreePort> free_ports;
    bool ok = true;

    for (int i = 0; i < count && ok; ++i) {
      EntitySpec e;
      e.kind = kinds[s.pick(0, static_cast<int>(kinds.size()) - 1)];
      e.name = "entity" + std::to_string(i + 1);
      e.position = Vec3(1.5 * (i % 2), 0, 2.0 * (count - i));
      sample_params(e.kind, e, s);
      try {
        dsl::finalize_entity(e);
      } catch (const ValidationError&) {
        ok = false;
        break;
      }

      if (i > 0) {
        // attach to the existing tree through a compatible port pair
        std::vector<std::pair<int, const dsl::PortSpec*>> options;
        for (std::size_t fp = 0; fp < free_ports.size(); ++fp) {
          for (const auto& p : e.connection_points) {
            if (dsl::ports_compatible(free_ports[fp].type, p.type)) {
              options.emplace_back(static_cast<int>(fp), &p);
            }
          }
        }
        if (options.empty()) {
          ok = false;
          break;
        }
        auto [fp_idx, my_port] =
            options[s.pick(0, static_cast<int>(options.size()) - 1)];
        FreePort tree_port = free_ports[fp_idx];
        free_ports.erase(free_ports.begin() + fp_idx);

        dsl::Connection conn;
        // a cable must be sourced by a CableEnd side
        bool tree_sources = tree_port.type == dsl::PortType::kCableEnd;
        conn.a = {tree_port.entity, tree_port.port,
                  tree_sources ? dsl::PortDirection::kInnerToOuter
                               : dsl::PortDirection::kOuterToInner};
        conn.b = {e.name, my_port->name,
                  tree_sources ? dsl::PortDirection::kOuterToInner
                               : dsl::PortDirection::kInnerToOuter};
        if (my_port->type == dsl::PortType::kAttach) {
          conn.a.direction = dsl::PortDirection::kInnerToOuter;
          conn.b.direction = dsl::PortDirection::kOuterToInner;
        } else if (tree_port.type == dsl::PortType::kAttach) {
          conn.a.direction = dsl::PortDirection::kOuterToInner;
          conn.b.direction = dsl::PortDirection::kInnerToOuter;
        }
        scene.connections.push_back(conn);

        for (const auto& p : e.connection_points) {
          if (p.name != my_port->name) {
            free_ports.push_back({e.name, p.name, p.type});
          }
        }
      } else {
        for (const auto& p : e.connection_points) {
          free_ports.push_back({e.name, p.name, p.type});
        }
      }
      scene.entities.push_back(std::move(e));
    }
    if (!ok) continue;

    // occasionally close a loop with one extra compatible connection
    if (free_ports.size() >= 2 && s.chance(cfg.extra_connection_probability)) {
      for (std::size_t a = 0; a < free_ports.size() && ok; ++a) {
        for (std::size_t b = a + 1; b < free_ports.size(); ++b) {
          if (free_ports[a].entity == free_ports[b].entity) continue;
          if (!dsl::ports_compatible(free_ports[a].type, free_ports[b].type)) {
            continue;
          }
          bool a_sources = free_ports[a].type == dsl::PortType::kCableEnd;
          dsl::Connection conn;
          conn.a = {free_ports[a].entity, free_ports[a].port,
                    a_sources ? dsl::PortDirection::kInnerToOuter
                              : dsl::PortDirection::kOuterToInner};
          conn.b = {free_ports[b].entity, free_ports[b].port,
                    a_sources ? dsl::PortDirection::kOuterToInner
                              : dsl::PortDirection::kInnerToOuter};
          scene.connections.push_back(conn);
          a = free_ports.size();
          break;
        }
      }
    }

    scene.name = "scene-" + std::to_string(cfg.rng_seed);
    // round-trip through the parser so every invariant is enforced
    try {
      return dsl::parse_scene(dsl::serialize_scene(scene));
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("generate_scene: no connectable entity set within " +
              std::to_string(cfg.max_attempts) + " attempts");
}

std::vector<dsl::SceneSpec> generate_batch(const GenConfig& cfg, int n) {
  if (n < 1) throw ValidationError("batch size must be >= 1");
  std::vector<dsl::SceneSpec> out;
  std::set<std::string> seen;
  std::uint64_t stream = 0;
  int budget = n * cfg.max_attempts;
  while (static_cast<int>(out.size()) < n) {
    if (budget-- <= 0) {
      throw Error("generate_batch: retry budget exhausted after " +
                  std::to_string(out.size()) + " unique scenes");
    }
    GenConfig child = cfg;
    child.rng_seed = derive_seed(cfg.rng_seed, stream++);
    dsl::SceneSpec scene;
    try {
      scene = generate_scene(child);
    } catch (const Error&) {
      continue;
    }
    std::string hash = dsl::canonical_hash_hex(scene);
    if (seen.insert(hash).second) {
      out.push_back(std::move(scene));
    }
  }
  return out;
}

}  // namespace forge::gen
