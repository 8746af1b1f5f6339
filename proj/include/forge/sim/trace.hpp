#pragma once

#include "forge/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace forge::sim {

// Per-body time series of every recorded quantity. 6-vectors are
// [linear xyz, angular xyz].
struct BodySeries {
  std::string name;  // "entity/body"
  std::vector<Vec3> displacement;
  std::vector<Vec3> com_offset;
  std::vector<Vec6> velocity;
  std::vector<Vec6> acceleration;
  std::vector<double> mass;
  std::vector<Vec6> momentum;
  std::vector<Vec6> net_force;
  std::vector<double> kinetic_energy_linear;
  std::vector<double> kinetic_energy_angular;
  std::vector<double> potential_energy;
  std::vector<Mat3> inertia;
  bool has_em = false;
  std::vector<double> em_potential_energy;
};

struct StringSeries {
  std::string name;  // "entity/string" or "tendon:a/p|b/q"
  std::vector<double> length;
  std::vector<double> velocity;
  std::vector<double> force;
  std::vector<double> stiffness;
};

struct ContactSeries {
  std::string name;  // "entity/a|b"
  std::vector<double> normal_force;
  std::vector<double> friction_force;
};

// Scene-wide aggregates, addressable as pseudo-body "system".
struct SystemSeries {
  std::vector<Vec6> momentum;
  std::vector<double> kinetic_energy;
  std::vector<double> potential_energy;
};

struct Trace {
  std::vector<double> times;
  std::vector<BodySeries> bodies;
  std::vector<StringSeries> strings;
  std::vector<ContactSeries> contacts;
  SystemSeries system;

  // Set by pruning (or by the simulator on numerical failure): index of the
  // last valid sample. Samples beyond it have been dropped.
  std::optional<std::size_t> truncated_at;
  // The offending sample inside the flagged window, when pruning truncated.
  std::optional<std::size_t> spike_index;
  std::string diagnostics;

  std::size_t size() const { return times.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back(); }

  const BodySeries* find_body(const std::string& name) const;
  const StringSeries* find_string(const std::string& name) const;
  const ContactSeries* find_contact(const std::string& name) const;

  // Drops all samples with index > last_kept, on every series.
  void truncate(std::size_t last_kept);
};

// Recorded quantity addressing: "velocity.z", "momentum.magnitude",
// "kinetic_energy_linear", "inertia.xx", "length" (strings), ... Returns the
// linearly interpolated value at time t. Throws Error for unknown
// body/quantity or t beyond the (possibly truncated) trace.
double probe(const Trace& trace, const std::string& body,
             const std::string& quantity, double t);

// Quantities probe() accepts for a given series owner, used by QA sampling.
std::vector<std::string> probe_quantities(const Trace& trace,
                                          const std::string& body);

// SI unit of a recorded quantity, e.g. "m/s" for velocity components.
std::string quantity_unit(const std::string& quantity);

// Human phrase for question templates, e.g. "the z-component of the velocity".
std::string quantity_phrase(const std::string& quantity);

}  // namespace forge::sim
