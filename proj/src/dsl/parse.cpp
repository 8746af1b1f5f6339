#include "forge/dsl/parse.hpp"

#include "forge/dsl/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace forge::dsl {

namespace {

[[noreturn]] void throw_at(const YAML::Node& node, const std::string& msg) {
  throw ParseError(msg, node.Mark().line + 1, node.Mark().column + 1);
}

void require_keys(const YAML::Node& map, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& kv : map) {
    std::string key = kv.first.as<std::string>();
    bool ok = std::any_of(allowed.begin(), allowed.end(),
                          [&](const char* a) { return key == a; });
    if (!ok) throw_at(kv.first, where + ": unknown key '" + key + "'");
  }
}

double as_number(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw_at(node, what + " must be a number");
  }
}

Vec3 as_vec3(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() != 3) {
    throw_at(node, what + " must be a 3-element list");
  }
  return Vec3(as_number(node[0], what), as_number(node[1], what),
              as_number(node[2], what));
}

ParamValue as_param_value(const YAML::Node& node) {
  if (node.IsSequence()) {
    std::vector<double> v;
    v.reserve(node.size());
    for (const auto& item : node) v.push_back(as_number(item, "list entry"));
    return ParamValue(std::move(v));
  }
  if (node.IsScalar()) {
    // Try number first; fall back to string (mass_type etc.).
    double d;
    try {
      d = node.as<double>();
      return ParamValue(d);
    } catch (const YAML::Exception&) {
      return ParamValue(node.as<std::string>());
    }
  }
  throw_at(node, "parameter values must be numbers, strings or number lists");
}

PortDirection as_direction(const YAML::Node& node) {
  std::string s = node.as<std::string>();
  if (s == "inner_to_outer") return PortDirection::kInnerToOuter;
  if (s == "outer_to_inner") return PortDirection::kOuterToInner;
  throw_at(node, "direction must be inner_to_outer or outer_to_inner");
}

EntitySpec parse_entity(const YAML::Node& node) {
  if (!node.IsMap()) throw_at(node, "entity entries must be maps");
  require_keys(node, {"name", "type", "position", "parameters"}, "entity");
  EntitySpec e;
  if (!node["name"]) throw_at(node, "entity needs a name");
  e.name = node["name"].as<std::string>();
  if (!node["type"]) throw_at(node, "entity '" + e.name + "' needs a type");
  std::string type = node["type"].as<std::string>();
  auto kind = entity_kind_from_name(type);
  if (!kind) throw_at(node["type"], "unknown entity kind '" + type + "'");
  e.kind = *kind;
  if (node["position"]) e.position = as_vec3(node["position"], "position");
  if (node["parameters"]) {
    const YAML::Node& params = node["parameters"];
    if (!params.IsMap()) throw_at(params, "parameters must be a map");
    for (const auto& kv : params) {
      e.params[kv.first.as<std::string>()] = as_param_value(kv.second);
    }
  }
  return e;
}

// Resolves an endpoint's port name when omitted: unambiguous if the entity
// has exactly one connection point of a type consistent with the direction.
std::string resolve_port(const EntitySpec& entity, const YAML::Node& where,
                         PortDirection dir) {
  std::vector<const PortSpec*> candidates;
  for (const auto& p : entity.connection_points) {
    if (dir == PortDirection::kInnerToOuter && p.type != PortType::kCableEnd) {
      continue;  // only a cable end can source a cable
    }
    candidates.push_back(&p);
  }
  if (candidates.size() == 1) return candidates[0]->name;
  if (candidates.empty()) {
    throw_at(where, "entity '" + entity.name + "' has no port usable as " +
                        std::string(to_string(dir)));
  }
  throw_at(where, "entity '" + entity.name +
                      "' has several candidate ports; specify 'port'");
}

struct Endpoint {
  ConnectionEnd end;
  const EntitySpec* entity;
};

Endpoint parse_endpoint(const YAML::Node& node, const SceneSpec& scene) {
  if (!node.IsMap()) throw_at(node, "connection endpoints must be maps");
  require_keys(node, {"entity", "port", "direction", "length"}, "endpoint");
  if (!node["entity"]) throw_at(node, "endpoint needs an entity");
  std::string name = node["entity"].as<std::string>();
  const EntitySpec* entity = scene.find_entity(name);
  if (!entity) {
    throw_at(node["entity"],
             "connection references undeclared entity '" + name + "'");
  }
  if (!node["direction"]) throw_at(node, "endpoint needs a direction");
  PortDirection dir = as_direction(node["direction"]);
  std::string port = node["port"] ? node["port"].as<std::string>()
                                  : resolve_port(*entity, node, dir);
  if (!entity->find_port(port)) {
    throw_at(node, "entity '" + name + "' has no port '" + port + "'");
  }
  return Endpoint{ConnectionEnd{name, port, dir}, entity};
}

// Union-find over entity indices.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void write_param_value(std::ostream& os, const ParamValue& v) {
  if (v.is_number()) {
    os << format_double(v.number());
  } else if (v.is_string()) {
    os << '"' << v.str() << '"';
  } else {
    os << '[';
    const auto& xs = v.list();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) os << ", ";
      os << format_double(xs[i]);
    }
    os << ']';
  }
}

std::string endpoint_key(const ConnectionEnd& e) {
  return e.entity + "/" + e.port;
}

}  // namespace

SceneSpec parse_scene(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& ex) {
    throw ParseError(std::string("syntax error: ") + ex.msg, ex.mark.line + 1,
                     ex.mark.column + 1);
  }
  if (!root.IsMap() || !root["scene"]) {
    throw ParseError("document must have a top-level 'scene' map");
  }
  const YAML::Node& sc = root["scene"];
  require_keys(root, {"scene"}, "document");
  require_keys(sc, {"name", "seed", "gravity", "entities", "connections"},
               "scene");

  SceneSpec scene;
  if (sc["name"]) scene.name = sc["name"].as<std::string>();
  if (sc["seed"]) scene.rng_seed = sc["seed"].as<std::uint64_t>();
  if (sc["gravity"]) scene.gravity = as_vec3(sc["gravity"], "gravity");

  if (!sc["entities"] || !sc["entities"].IsSequence() ||
      sc["entities"].size() == 0) {
    throw ParseError("scene has no entities (empty scene)");
  }
  for (const auto& node : sc["entities"]) {
    EntitySpec e = parse_entity(node);
    if (scene.find_entity(e.name)) {
      throw_at(node, "duplicate entity name '" + e.name + "'");
    }
    finalize_entity(e);
    scene.entities.push_back(std::move(e));
  }

  std::set<std::string> used_ports;
  if (sc["connections"]) {
    if (!sc["connections"].IsSequence()) {
      throw ParseError("connections must be a list");
    }
    for (const auto& node : sc["connections"]) {
      if (!node.IsMap() || node.size() != 1) {
        throw_at(node, "each connection must be a single-mode map");
      }
      auto kv = *node.begin();
      std::string mode = kv.first.as<std::string>();
      if (mode != "tendon") {
        throw_at(kv.first, "unknown connection mode '" + mode + "'");
      }
      const YAML::Node& ends = kv.second;
      if (!ends.IsSequence() || ends.size() != 2) {
        throw_at(kv.second, "a tendon connects exactly two endpoints");
      }
      Endpoint a = parse_endpoint(ends[0], scene);
      Endpoint b = parse_endpoint(ends[1], scene);

      auto verdict = validate_connection(
          *a.entity, a.end.port, a.end.direction,
          used_ports.count(endpoint_key(a.end)) > 0, *b.entity, b.end.port,
          b.end.direction, used_ports.count(endpoint_key(b.end)) > 0);
      if (!verdict.ok) throw_at(node, verdict.reason);

      used_ports.insert(endpoint_key(a.end));
      used_ports.insert(endpoint_key(b.end));

      Connection c;
      c.mode = mode;
      c.a = a.end;
      c.b = b.end;
      if (ends[0]["length"]) {
        c.length = as_number(ends[0]["length"], "length");
      } else if (ends[1]["length"]) {
        c.length = as_number(ends[1]["length"], "length");
      }
      scene.connections.push_back(std::move(c));
    }
  }

  // The entity graph induced by connections must be connected.
  DisjointSet ds(static_cast<int>(scene.entities.size()));
  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < scene.entities.size(); ++i) {
      if (scene.entities[i].name == name) return static_cast<int>(i);
    }
    return -1;
  };
  for (const auto& c : scene.connections) {
    ds.unite(index_of(c.a.entity), index_of(c.b.entity));
  }
  int root_comp = ds.find(0);
  for (std::size_t i = 1; i < scene.entities.size(); ++i) {
    if (ds.find(static_cast<int>(i)) != root_comp) {
      throw ValidationError("scene '" + scene.name +
                            "': entity graph is disconnected ('" +
                            scene.entities[i].name + "' unreachable)");
    }
  }
  return scene;
}

SceneSpec parse_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

ConnectionVerdict validate_connection(const EntitySpec& a,
                                      const std::string& port_a,
                                      PortDirection dir_a, bool a_used,
                                      const EntitySpec& b,
                                      const std::string& port_b,
                                      PortDirection dir_b, bool b_used) {
  const PortSpec* pa = a.find_port(port_a);
  const PortSpec* pb = b.find_port(port_b);
  if (!pa) return {false, "entity '" + a.name + "' has no port '" + port_a + "'"};
  if (!pb) return {false, "entity '" + b.name + "' has no port '" + port_b + "'"};
  if (a_used) {
    return {false, "port '" + a.name + "/" + port_a + "' is already connected"};
  }
  if (b_used) {
    return {false, "port '" + b.name + "/" + port_b + "' is already connected"};
  }
  if (a.name == b.name) {
    return {false, "an entity cannot connect to itself"};
  }
  if (dir_a == dir_b) {
    return {false, "connection directions must oppose (one inner_to_outer, "
                   "one outer_to_inner)"};
  }
  if (pa->type == PortType::kAttach && dir_a == PortDirection::kInnerToOuter) {
    return {false, "attachment port '" + port_a + "' cannot source a cable"};
  }
  if (pb->type == PortType::kAttach && dir_b == PortDirection::kInnerToOuter) {
    return {false, "attachment port '" + port_b + "' cannot source a cable"};
  }
  if (!ports_compatible(pa->type, pb->type)) {
    return {false, "ports '" + port_a + "' and '" + port_b +
                       "' have incompatible types"};
  }
  return {true, ""};
}

std::string serialize_scene(const SceneSpec& scene) {
  std::ostringstream os;
  os << "scene:\n";
  os << "  name: \"" << scene.name << "\"\n";
  os << "  seed: " << scene.rng_seed << "\n";
  os << "  gravity: [" << format_double(scene.gravity.x()) << ", "
     << format_double(scene.gravity.y()) << ", "
     << format_double(scene.gravity.z()) << "]\n";

  std::vector<const EntitySpec*> entities;
  for (const auto& e : scene.entities) entities.push_back(&e);
  std::sort(entities.begin(), entities.end(),
            [](const EntitySpec* x, const EntitySpec* y) {
              return x->name < y->name;
            });

  os << "  entities:\n";
  for (const EntitySpec* e : entities) {
    os << "    - name: \"" << e->name << "\"\n";
    os << "      type: \"" << entity_info(e->kind).dsl_name << "\"\n";
    os << "      position: [" << format_double(e->position.x()) << ", "
       << format_double(e->position.y()) << ", "
       << format_double(e->position.z()) << "]\n";
    if (!e->params.empty()) {
      os << "      parameters:\n";
      for (const auto& [key, value] : e->params) {  // std::map: sorted
        os << "        " << key << ": ";
        write_param_value(os, value);
        os << "\n";
      }
    }
  }

  if (!scene.connections.empty()) {
    std::vector<Connection> conns = scene.connections;
    for (auto& c : conns) {
      if (endpoint_key(c.b) < endpoint_key(c.a)) std::swap(c.a, c.b);
    }
    std::sort(conns.begin(), conns.end(),
              [](const Connection& x, const Connection& y) {
                return std::pair(endpoint_key(x.a), endpoint_key(x.b)) <
                       std::pair(endpoint_key(y.a), endpoint_key(y.b));
              });
    os << "  connections:\n";
    for (const auto& c : conns) {
      os << "    - " << c.mode << ":\n";
      for (const ConnectionEnd* end : {&c.a, &c.b}) {
        os << "      - entity: \"" << end->entity << "\"\n";
        os << "        port: \"" << end->port << "\"\n";
        os << "        direction: \"" << to_string(end->direction) << "\"\n";
      }
    }
  }
  return os.str();
}

Digest256 canonical_hash(const SceneSpec& scene) {
  return sha256(serialize_scene(scene));
}

std::string canonical_hash_hex(const SceneSpec& scene) {
  return to_hex(canonical_hash(scene));
}

}  // namespace forge::dsl
