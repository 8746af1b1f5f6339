#include "forge/sim/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace forge::sim {

namespace {

// Constraint-aware acceleration solve. With constant mass matrices the KKT
// system is factored once; rigid-string tensions are the multipliers.
class Dynamics {
 public:
  explicit Dynamics(const CompiledModel& model)
      : model_(model), nq_(model.nq) {
    J_.resize(model.constraints.rows() + model.weld_rows.rows(), nq_);
    if (model.constraints.rows() > 0) {
      J_.topRows(model.constraints.rows()) = model.constraints;
    }
    if (model.weld_rows.rows() > 0) {
      J_.bottomRows(model.weld_rows.rows()) = model.weld_rows;
    }
    nc_ = static_cast<int>(J_.rows());

    const_mass_ = true;
    for (const auto& b : model.blocks) {
      if (!b->mass_is_constant()) const_mass_ = false;
    }
    M_.resize(nq_, nq_);
    if (const_mass_) {
      assemble_mass(0.0, model.initial.q);
      factor();
    }
  }

  int constraint_rows() const { return nc_; }

  // Minimum-energy projection of v onto the constraint manifold (J v = 0),
  // applied after discrete events so that an impulsive velocity change on one
  // entity propagates through the cables as a constraint impulse.
  void project_velocities(double t, CVecRef q, Eigen::VectorXd& v) {
    if (nc_ == 0) return;
    if (!const_mass_) {
      assemble_mass(t, q);
      factor();
    }
    Eigen::VectorXd rhs(nq_ + nc_);
    rhs.head(nq_) = M_ * v;
    rhs.tail(nc_).setZero();
    v = kkt_.solve(rhs).head(nq_);
  }

  void accel(double t, CVecRef q, CVecRef v, const std::vector<int>& mode,
             Eigen::VectorXd& vdot, Eigen::VectorXd* lambda = nullptr) {
    Eigen::VectorXd f(nq_);
    for (std::size_t b = 0; b < model_.blocks.size(); ++b) {
      int off = model_.offsets[b];
      int n = model_.blocks[b]->dof();
      model_.blocks[b]->force(t, q.segment(off, n), v.segment(off, n), mode[b],
                              f.segment(off, n));
    }
    if (!const_mass_) {
      assemble_mass(t, q);
      factor();
    }
    if (nc_ == 0) {
      vdot = llt_.solve(f);
      if (lambda) lambda->resize(0);
      return;
    }
    Eigen::VectorXd rhs(nq_ + nc_);
    rhs.head(nq_) = f;
    rhs.tail(nc_).setZero();
    Eigen::VectorXd sol = kkt_.solve(rhs);
    vdot = sol.head(nq_);
    if (lambda) *lambda = sol.tail(nc_);
  }

 private:
  void assemble_mass(double t, CVecRef q) {
    M_.setZero();
    for (std::size_t b = 0; b < model_.blocks.size(); ++b) {
      int off = model_.offsets[b];
      int n = model_.blocks[b]->dof();
      model_.blocks[b]->mass_matrix(t, q.segment(off, n),
                                    M_.block(off, off, n, n));
    }
  }

  void factor() {
    if (nc_ == 0) {
      llt_.compute(M_);
      return;
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nq_ + nc_, nq_ + nc_);
    kkt.topLeftCorner(nq_, nq_) = M_;
    kkt.topRightCorner(nq_, nc_) = -J_.transpose();
    kkt.bottomLeftCorner(nc_, nq_) = J_;
    kkt_.compute(kkt);
  }

  const CompiledModel& model_;
  int nq_, nc_;
  Eigen::MatrixXd J_, M_;
  bool const_mass_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  // rank-revealing: tolerates redundant anchors (minimum-norm tensions)
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> kkt_;
};

struct StepResult {
  Eigen::VectorXd q, v;
};

StepResult rk4_step(Dynamics& dyn, const State& s, double h) {
  Eigen::VectorXd a1, a2, a3, a4;
  dyn.accel(s.t, s.q, s.v, s.mode, a1);
  Eigen::VectorXd q2 = s.q + 0.5 * h * s.v;
  Eigen::VectorXd v2 = s.v + 0.5 * h * a1;
  dyn.accel(s.t + 0.5 * h, q2, v2, s.mode, a2);
  Eigen::VectorXd q3 = s.q + 0.5 * h * v2;
  Eigen::VectorXd v3 = s.v + 0.5 * h * a2;
  dyn.accel(s.t + 0.5 * h, q3, v3, s.mode, a3);
  Eigen::VectorXd q4 = s.q + h * v3;
  Eigen::VectorXd v4 = s.v + h * a3;
  dyn.accel(s.t + h, q4, v4, s.mode, a4);
  StepResult r;
  r.q = s.q + (h / 6.0) * (s.v + 2.0 * v2 + 2.0 * v3 + v4);
  r.v = s.v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  return r;
}

struct EventRef {
  int block;
  int index;
};

// Recording scratch: last recorded body linear/angular velocity, to write
// finite-difference accelerations when an unmodeled-transition guard fires.
struct RecordScratch {
  std::vector<Vec3> prev_lin_vel;
  std::vector<Vec3> prev_ang_vel;
};

void record_sample(const CompiledModel& model, const State& s, Dynamics& dyn,
                   Trace& trace, const std::set<int>& spike_blocks,
                   RecordScratch& scratch, double dt) {
  Eigen::VectorXd vdot, lambda;
  dyn.accel(s.t, s.q, s.v, s.mode, vdot, &lambda);

  trace.times.push_back(s.t);

  Vec6 sys_momentum = Vec6::Zero();
  double sys_ke = 0.0, sys_pe = 0.0;

  for (std::size_t bi = 0; bi < model.bodies.size(); ++bi) {
    const CompiledBody& cb = model.bodies[bi];
    const EntityBlock& blk = *model.blocks[cb.block];
    int off = model.offsets[cb.block];
    int n = blk.dof();
    BodyState bs = blk.body_state(cb.local_index, s.t, s.q.segment(off, n),
                                  s.v.segment(off, n), vdot.segment(off, n),
                                  s.mode[cb.block]);

    bool spiked = spike_blocks.count(cb.block) > 0;
    if (spiked && dt > 0) {
      bs.lin_acc = (bs.lin_vel - scratch.prev_lin_vel[bi]) / dt;
      bs.ang_acc = (bs.ang_vel - scratch.prev_ang_vel[bi]) / dt;
    }
    scratch.prev_lin_vel[bi] = bs.lin_vel;
    scratch.prev_ang_vel[bi] = bs.ang_vel;

    BodySeries& series = trace.bodies[bi];
    series.displacement.push_back(bs.position);
    series.com_offset.push_back(bs.com_offset);
    Vec6 vel, acc, mom, force;
    vel << bs.lin_vel, bs.ang_vel;
    acc << bs.lin_acc, bs.ang_acc;
    mom << bs.mass * bs.lin_vel, bs.inertia * bs.ang_vel;
    force << bs.mass * bs.lin_acc, bs.inertia * bs.ang_acc;
    series.velocity.push_back(vel);
    series.acceleration.push_back(acc);
    series.mass.push_back(bs.mass);
    series.momentum.push_back(mom);
    series.net_force.push_back(force);
    double ke_lin = 0.5 * bs.mass * bs.lin_vel.squaredNorm();
    double ke_ang = 0.5 * bs.ang_vel.dot(bs.inertia * bs.ang_vel);
    series.kinetic_energy_linear.push_back(ke_lin);
    series.kinetic_energy_angular.push_back(ke_ang);
    series.potential_energy.push_back(bs.potential_energy);
    series.inertia.push_back(bs.inertia);
    if (series.has_em) {
      series.em_potential_energy.push_back(
          bs.em_potential_energy.value_or(0.0));
    }

    sys_momentum.head<3>() += mom.head<3>();
    sys_momentum.tail<3>() +=
        mom.tail<3>() + bs.position.cross(Vec3(bs.mass * bs.lin_vel));
    sys_ke += ke_lin + ke_ang;
    sys_pe += bs.potential_energy + bs.em_potential_energy.value_or(0.0);
  }

  trace.system.momentum.push_back(sys_momentum);
  trace.system.kinetic_energy.push_back(sys_ke);
  trace.system.potential_energy.push_back(sys_pe);

  for (std::size_t si = 0; si < model.strings.size(); ++si) {
    const CompiledString& cs = model.strings[si];
    StringSeries& series = trace.strings[si];
    StringState st;
    if (cs.block >= 0) {
      const EntityBlock& blk = *model.blocks[cs.block];
      int off = model.offsets[cs.block];
      int n = blk.dof();
      st = blk.string_state(cs.local_index, s.t, s.q.segment(off, n),
                            s.v.segment(off, n));
    } else {
      // cross-entity tendon or tie-off: length from the constraint row
      st.length = cs.nominal_length -
                  model.constraints.row(cs.row).dot(s.q - model.initial.q);
      st.velocity = -model.constraints.row(cs.row).dot(s.v);
    }
    if (cs.row >= 0 && cs.row < lambda.size()) {
      st.force = lambda[cs.row];
    }
    series.length.push_back(st.length);
    series.velocity.push_back(st.velocity);
    series.force.push_back(st.force);
    series.stiffness.push_back(st.stiffness);
  }

  // contacts are grouped per block so each block fills its own slice
  std::size_t ci = 0;
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    const EntityBlock& blk = *model.blocks[b];
    auto local = blk.contacts();
    if (local.empty()) continue;
    std::vector<ContactState> states(local.size());
    int off = model.offsets[b];
    int n = blk.dof();
    blk.contact_state(s.t, s.q.segment(off, n), s.v.segment(off, n),
                      vdot.segment(off, n), s.mode[b], states);
    for (const auto& st : states) {
      trace.contacts[ci].normal_force.push_back(st.normal_force);
      trace.contacts[ci].friction_force.push_back(st.friction_force);
      ++ci;
    }
  }
}

}  // namespace

Trace simulate(const CompiledModel& model) {
  Dynamics dyn(model);

  Trace trace;
  trace.bodies.resize(model.bodies.size());
  for (std::size_t i = 0; i < model.bodies.size(); ++i) {
    trace.bodies[i].name = model.bodies[i].name;
    trace.bodies[i].has_em =
        model.blocks[model.bodies[i].block]->kind() ==
        dsl::EntityKind::kEmEntity;
  }
  trace.strings.resize(model.strings.size());
  for (std::size_t i = 0; i < model.strings.size(); ++i) {
    trace.strings[i].name = model.strings[i].name;
  }
  trace.contacts.resize(model.contacts.size());
  for (std::size_t i = 0; i < model.contacts.size(); ++i) {
    trace.contacts[i].name = model.contacts[i].name;
  }

  RecordScratch scratch;
  scratch.prev_lin_vel.assign(model.bodies.size(), Vec3::Zero());
  scratch.prev_ang_vel.assign(model.bodies.size(), Vec3::Zero());

  State state = model.initial;
  std::set<int> spike_blocks;
  record_sample(model, state, dyn, trace, spike_blocks, scratch, 0.0);

  long steps = std::lround(model.horizon / model.dt);
  if (steps < 1) throw SimulationError("zero-length horizon");

  const double arm_tol = 1e-9;
  std::vector<std::vector<double>> event_prev(model.blocks.size());
  auto eval_events = [&](const State& s, std::vector<std::vector<double>>& out) {
    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
      const EntityBlock& blk = *model.blocks[b];
      int off = model.offsets[b];
      int n = blk.dof();
      out[b].resize(blk.event_count());
      for (int k = 0; k < blk.event_count(); ++k) {
        out[b][k] = blk.event_value(k, s.t, s.q.segment(off, n),
                                    s.v.segment(off, n), s.mode[b]);
      }
    }
  };

  for (long i = 1; i <= steps; ++i) {
    spike_blocks.clear();
    double target = static_cast<double>(i) * model.dt;
    int guard = 0;
    while (state.t < target - 1e-12) {
      double h = target - state.t;
      eval_events(state, event_prev);
      StepResult full = rk4_step(dyn, state, h);

      // find the earliest event firing inside (0, h]
      double h_event = -1.0;
      EventRef hit{-1, -1};
      for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        const EntityBlock& blk = *model.blocks[b];
        int off = model.offsets[b];
        int n = blk.dof();
        for (int k = 0; k < blk.event_count(); ++k) {
          if (event_prev[b][k] <= arm_tol) continue;
          double v_end = blk.event_value(
              k, state.t + h, full.q.segment(off, n), full.v.segment(off, n),
              state.mode[b]);
          if (v_end > 0) continue;
          // bisect the crossing on the one-step flow
          double lo = 0.0, hi = h;
          for (int it = 0; it < 60 && (hi - lo) > 1e-12 * h; ++it) {
            double mid = 0.5 * (lo + hi);
            StepResult trial = rk4_step(dyn, state, mid);
            double val = blk.event_value(k, state.t + mid,
                                         trial.q.segment(off, n),
                                         trial.v.segment(off, n),
                                         state.mode[b]);
            (val > 0 ? lo : hi) = mid;
          }
          if (h_event < 0 || hi < h_event) {
            h_event = hi;
            hit = {static_cast<int>(b), k};
          }
        }
      }

      if (hit.block < 0) {
        state.q = std::move(full.q);
        state.v = std::move(full.v);
        state.t = target;
        break;
      }

      StepResult at_event = rk4_step(dyn, state, h_event);
      state.q = std::move(at_event.q);
      state.v = std::move(at_event.v);
      state.t += h_event;
      const EntityBlock& blk = *model.blocks[hit.block];
      int off = model.offsets[hit.block];
      int n = blk.dof();
      bool spike = false;
      blk.apply_event(hit.index, state.t, state.q.segment(off, n),
                      state.v.segment(off, n), state.mode[hit.block], spike);
      if (spike) spike_blocks.insert(hit.block);
      dyn.project_velocities(state.t, state.q, state.v);

      if (++guard > 64) {
        trace.diagnostics = "event storm at t=" + std::to_string(state.t);
        trace.truncated_at = trace.times.size() - 1;
        return trace;
      }
    }

    if (!state.q.allFinite() || !state.v.allFinite()) {
      trace.diagnostics = "numerical blow-up at t=" + std::to_string(state.t);
      trace.truncated_at = trace.times.size() - 1;
      return trace;
    }
    record_sample(model, state, dyn, trace, spike_blocks, scratch, model.dt);
  }
  return trace;
}

}  // namespace forge::sim
