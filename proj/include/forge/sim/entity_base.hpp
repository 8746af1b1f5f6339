#pragma once

#include "forge/sim/model.hpp"

#include <cmath>

namespace forge::sim {

// Regularized Coulomb friction sign. v_eps trades stick fidelity for
// smoothness; near-stick states creep at ~v_eps.
inline double smooth_sign(double v, double v_eps = 1e-4) {
  return std::tanh(v / v_eps);
}

// Critically damped stiff pin holding coordinate i at `stop` after an
// unmodeled-transition guard fired. Keeps the post-spike trace bounded; the
// pruner discards everything from the spike on anyway.
inline void add_pin(VecRef f, CVecRef q, CVecRef v, int i, double stop,
                    double m) {
  double k = 4.0e4 * m;
  double c = 2.0 * std::sqrt(k * m);
  f[i] += -k * (q[i] - stop) - c * v[i];
}

std::unique_ptr<EntityBlock> build_mech_block(const dsl::EntitySpec& spec,
                                              const dsl::SceneSpec& scene);
std::unique_ptr<EntityBlock> build_field_block(const dsl::EntitySpec& spec,
                                               const dsl::SceneSpec& scene);

}  // namespace forge::sim
