#include "forge/sim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace forge::sim {

namespace {

template <typename T>
void cut(std::vector<T>& v, std::size_t keep) {
  if (v.size() > keep) v.resize(keep);
}

int axis_index(const std::string& c) {
  if (c == "x") return 0;
  if (c == "y") return 1;
  if (c == "z") return 2;
  if (c == "rx") return 3;
  if (c == "ry") return 4;
  if (c == "rz") return 5;
  return -1;
}

double vec_component(const Vec3& v, const std::string& comp) {
  if (comp == "magnitude") return v.norm();
  int i = axis_index(comp);
  if (i < 0 || i > 2) throw Error("unknown vector component '" + comp + "'");
  return v[i];
}

double vec6_component(const Vec6& v, const std::string& comp) {
  if (comp == "magnitude") return v.head<3>().norm();
  int i = axis_index(comp);
  if (i < 0) throw Error("unknown vector component '" + comp + "'");
  return v[i];
}

double mat_component(const Mat3& m, const std::string& comp) {
  static const std::map<std::string, std::pair<int, int>> idx = {
      {"xx", {0, 0}}, {"yy", {1, 1}}, {"zz", {2, 2}},
      {"xy", {0, 1}}, {"xz", {0, 2}}, {"yz", {1, 2}}};
  auto it = idx.find(comp);
  if (it == idx.end()) throw Error("unknown tensor component '" + comp + "'");
  return m(it->second.first, it->second.second);
}

std::pair<std::string, std::string> split_quantity(const std::string& q) {
  auto dot = q.find('.');
  if (dot == std::string::npos) return {q, ""};
  return {q.substr(0, dot), q.substr(dot + 1)};
}

// Sample value of quantity `q` for body series `b` at step i.
double body_value(const BodySeries& b, const std::string& q, std::size_t i) {
  auto [base, comp] = split_quantity(q);
  if (base == "displacement") return vec_component(b.displacement[i], comp);
  if (base == "com_offset") return vec_component(b.com_offset[i], comp);
  if (base == "velocity") return vec6_component(b.velocity[i], comp);
  if (base == "acceleration") return vec6_component(b.acceleration[i], comp);
  if (base == "momentum") return vec6_component(b.momentum[i], comp);
  if (base == "net_force") return vec6_component(b.net_force[i], comp);
  if (base == "mass") return b.mass[i];
  if (base == "kinetic_energy_linear") return b.kinetic_energy_linear[i];
  if (base == "kinetic_energy_angular") return b.kinetic_energy_angular[i];
  if (base == "potential_energy") return b.potential_energy[i];
  if (base == "em_potential_energy") {
    if (!b.has_em) throw Error("body has no em_potential_energy series");
    return b.em_potential_energy[i];
  }
  if (base == "inertia") return mat_component(b.inertia[i], comp);
  throw Error("unknown quantity '" + q + "'");
}

double string_value(const StringSeries& s, const std::string& q,
                    std::size_t i) {
  if (q == "length") return s.length[i];
  if (q == "velocity") return s.velocity[i];
  if (q == "force") return s.force[i];
  if (q == "stiffness") return s.stiffness[i];
  throw Error("unknown string quantity '" + q + "'");
}

double contact_value(const ContactSeries& c, const std::string& q,
                     std::size_t i) {
  if (q == "normal_force") return c.normal_force[i];
  if (q == "friction_force") return c.friction_force[i];
  throw Error("unknown contact quantity '" + q + "'");
}

double system_value(const SystemSeries& s, const std::string& q,
                    std::size_t i) {
  auto [base, comp] = split_quantity(q);
  if (base == "momentum") return vec6_component(s.momentum[i], comp);
  if (base == "kinetic_energy") return s.kinetic_energy[i];
  if (base == "potential_energy") return s.potential_energy[i];
  throw Error("unknown system quantity '" + q + "'");
}

}  // namespace

const BodySeries* Trace::find_body(const std::string& name) const {
  for (const auto& b : bodies) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const StringSeries* Trace::find_string(const std::string& name) const {
  for (const auto& s : strings) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const ContactSeries* Trace::find_contact(const std::string& name) const {
  for (const auto& c : contacts) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void Trace::truncate(std::size_t last_kept) {
  std::size_t keep = last_kept + 1;
  cut(times, keep);
  for (auto& b : bodies) {
    cut(b.displacement, keep);
    cut(b.com_offset, keep);
    cut(b.velocity, keep);
    cut(b.acceleration, keep);
    cut(b.mass, keep);
    cut(b.momentum, keep);
    cut(b.net_force, keep);
    cut(b.kinetic_energy_linear, keep);
    cut(b.kinetic_energy_angular, keep);
    cut(b.potential_energy, keep);
    cut(b.inertia, keep);
    cut(b.em_potential_energy, keep);
  }
  for (auto& s : strings) {
    cut(s.length, keep);
    cut(s.velocity, keep);
    cut(s.force, keep);
    cut(s.stiffness, keep);
  }
  for (auto& c : contacts) {
    cut(c.normal_force, keep);
    cut(c.friction_force, keep);
  }
  cut(system.momentum, keep);
  cut(system.kinetic_energy, keep);
  cut(system.potential_energy, keep);
}

double probe(const Trace& trace, const std::string& body,
             const std::string& quantity, double t) {
  if (trace.times.empty()) throw Error("probe on an empty trace");
  if (t < trace.times.front() - 1e-12 || t > trace.times.back() + 1e-12) {
    throw Error("probe time " + std::to_string(t) +
                " outside the recorded range [0, " +
                std::to_string(trace.times.back()) + "]");
  }
  t = std::clamp(t, trace.times.front(), trace.times.back());

  auto it = std::lower_bound(trace.times.begin(), trace.times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - trace.times.begin());
  std::size_t lo = hi == 0 ? 0 : hi - 1;
  if (hi >= trace.times.size()) hi = trace.times.size() - 1;
  double w = (hi == lo) ? 0.0
                        : (t - trace.times[lo]) /
                              (trace.times[hi] - trace.times[lo]);

  auto sample = [&](std::size_t i) -> double {
    if (body == "system") return system_value(trace.system, quantity, i);
    if (const BodySeries* b = trace.find_body(body)) {
      return body_value(*b, quantity, i);
    }
    if (const StringSeries* s = trace.find_string(body)) {
      return string_value(*s, quantity, i);
    }
    if (const ContactSeries* c = trace.find_contact(body)) {
      return contact_value(*c, quantity, i);
    }
    throw Error("unknown body '" + body + "'");
  };
  return (1.0 - w) * sample(lo) + w * sample(hi);
}

std::vector<std::string> probe_quantities(const Trace& trace,
                                          const std::string& body) {
  if (body == "system") {
    return {"momentum.x",         "momentum.z",        "momentum.magnitude",
            "kinetic_energy",     "potential_energy"};
  }
  if (const BodySeries* b = trace.find_body(body)) {
    std::vector<std::string> out = {
        "displacement.x",       "displacement.z",
        "displacement.magnitude", "velocity.x",
        "velocity.z",           "velocity.magnitude",
        "acceleration.x",       "acceleration.z",
        "acceleration.magnitude", "mass",
        "momentum.x",           "momentum.z",
        "momentum.magnitude",   "net_force.z",
        "net_force.magnitude",  "kinetic_energy_linear",
        "kinetic_energy_angular", "potential_energy"};
    if (b->has_em) out.push_back("em_potential_energy");
    return out;
  }
  if (trace.find_string(body)) return {"length", "velocity", "force"};
  if (trace.find_contact(body)) return {"normal_force", "friction_force"};
  return {};
}

std::string quantity_unit(const std::string& quantity) {
  auto [base, comp] = split_quantity(quantity);
  bool angular = comp.size() >= 2 && comp[0] == 'r';
  if (base == "displacement" || base == "com_offset" || base == "length") {
    return "m";
  }
  if (base == "velocity") return angular ? "rad/s" : "m/s";
  if (base == "acceleration") return angular ? "rad/s^2" : "m/s^2";
  if (base == "mass") return "kg";
  if (base == "momentum") return angular ? "kg m^2/s" : "kg m/s";
  if (base == "net_force" || base == "force" || base == "normal_force" ||
      base == "friction_force") {
    return angular ? "N m" : "N";
  }
  if (base == "kinetic_energy_linear" || base == "kinetic_energy_angular" ||
      base == "potential_energy" || base == "em_potential_energy" ||
      base == "kinetic_energy") {
    return "J";
  }
  if (base == "inertia") return "kg m^2";
  if (base == "stiffness") return "N/m";
  return "";
}

std::string quantity_phrase(const std::string& quantity) {
  auto [base, comp] = split_quantity(quantity);
  static const std::map<std::string, std::string> names = {
      {"displacement", "position"},
      {"com_offset", "center-of-mass offset"},
      {"velocity", "velocity"},
      {"acceleration", "acceleration"},
      {"mass", "mass"},
      {"momentum", "momentum"},
      {"net_force", "net force"},
      {"kinetic_energy_linear", "translational kinetic energy"},
      {"kinetic_energy_angular", "rotational kinetic energy"},
      {"kinetic_energy", "total kinetic energy"},
      {"potential_energy", "potential energy"},
      {"em_potential_energy", "electromagnetic potential energy"},
      {"inertia", "inertia tensor"},
      {"length", "length"},
      {"force", "tension"},
      {"stiffness", "stiffness"},
      {"normal_force", "normal force"},
      {"friction_force", "friction force"}};
  auto it = names.find(base);
  std::string noun = it != names.end() ? it->second : base;
  if (comp.empty()) return "the " + noun;
  if (comp == "magnitude") return "the magnitude of the " + noun;
  if (comp.size() >= 2 && comp[0] == 'r') {
    return "the angular " + noun + " about the " + comp.substr(1) + "-axis";
  }
  return "the " + comp + "-component of the " + noun;
}

}  // namespace forge::sim
