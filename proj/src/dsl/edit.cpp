#include "forge/dsl/edit.hpp"

#include "forge/dsl/registry.hpp"

namespace forge::dsl {

namespace {

EntitySpec* find_mutable(SceneSpec& scene, const std::string& name) {
  for (auto& e : scene.entities) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

}  // namespace

ParamPath parse_param_path(const std::string& text) {
  ParamPath p;
  auto dot = text.find('.');
  if (dot == std::string::npos) throw Error("bad param path: " + text);
  p.entity = text.substr(0, dot);
  std::string rest = text.substr(dot + 1);
  auto bracket = rest.find('[');
  if (bracket == std::string::npos) {
    p.field = rest;
    p.index = -1;
  } else {
    if (rest.back() != ']') throw Error("bad param path: " + text);
    p.field = rest.substr(0, bracket);
    p.index = std::stoi(rest.substr(bracket + 1,
                                    rest.size() - bracket - 2));
  }
  return p;
}

double get_param(const SceneSpec& scene, const ParamPath& path) {
  const EntitySpec* e = scene.find_entity(path.entity);
  if (!e) throw Error("no entity '" + path.entity + "'");
  auto it = e->params.find(path.field);
  if (it == e->params.end()) {
    throw Error("entity '" + path.entity + "' has no parameter '" +
                path.field + "'");
  }
  if (path.index < 0) {
    if (!it->second.is_number()) {
      throw Error("parameter '" + path.str() + "' is not a scalar");
    }
    return it->second.number();
  }
  if (!it->second.is_list() ||
      path.index >= static_cast<int>(it->second.list().size())) {
    throw Error("parameter '" + path.str() + "' out of range");
  }
  return it->second.list()[path.index];
}

void set_param(SceneSpec& scene, const ParamPath& path, double value) {
  EntitySpec* e = find_mutable(scene, path.entity);
  if (!e) throw Error("no entity '" + path.entity + "'");
  auto it = e->params.find(path.field);
  if (it == e->params.end()) {
    throw Error("entity '" + path.entity + "' has no parameter '" +
                path.field + "'");
  }
  if (path.index < 0) {
    if (!it->second.is_number()) {
      throw Error("parameter '" + path.str() + "' is not a scalar");
    }
    it->second = ParamValue(value);
  } else {
    if (!it->second.is_list() ||
        path.index >= static_cast<int>(it->second.list().size())) {
      throw Error("parameter '" + path.str() + "' out of range");
    }
    auto list = it->second.list();
    list[path.index] = value;
    it->second = ParamValue(std::move(list));
  }
  finalize_entity(*e);
}

}  // namespace forge::dsl
