#pragma once

#include "forge/common.hpp"
#include "forge/dsl/types.hpp"
#include "forge/sim/trace.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace forge::sim {

using VecRef = Eigen::Ref<Eigen::VectorXd>;
using CVecRef = const Eigen::Ref<const Eigen::VectorXd>&;

// Snapshot of one rigid body, produced by its entity block for recording.
struct BodyState {
  Vec3 position = Vec3::Zero();
  Vec3 com_offset = Vec3::Zero();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  Vec3 lin_acc = Vec3::Zero();
  Vec3 ang_acc = Vec3::Zero();
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();  // about COM, world axes
  double potential_energy = 0.0;
  std::optional<double> em_potential_energy;
};

// A recordable string owned by an entity. Rigid strings become global
// constraint rows (their tension is the row's Lagrange multiplier); springs
// apply their own force inside EntityBlock::force.
struct StringModel {
  std::string name;
  bool rigid = true;
  // Rigid only: string length rate = length_row . v (local coordinates).
  Eigen::VectorXd length_row;
};

struct StringState {
  double length = 0.0;
  double velocity = 0.0;
  double force = 0.0;      // springs fill this; rigid strings get lambda
  double stiffness = 0.0;  // 0 marks an inextensible string
};

// A cable interface to other entities. The cable inside the entity (from its
// far end up to this port's guide) has length `internal_length0 +
// internal_row . (q - q0)`. The guide sits at `guide_pos` and moves with
// world velocity `guide_vel_rows * v` (zero rows for fixed guides). The free
// span from the guide to the partner's guide is assumed to keep a constant
// direction, which holds for the vertically stacked layouts the generator
// emits. An unconnected port is tied off at `guide_pos + anchor_offset`.
struct PortModel {
  std::string name;
  Eigen::VectorXd internal_row;
  double internal_length0 = 0.0;
  Vec3 guide_pos = Vec3::Zero();
  Eigen::MatrixXd guide_vel_rows;  // 3 x ndof, may be empty for fixed guides
  // Unconnected behavior: a load-bearing port is tied off to the world at
  // guide_pos + anchor_offset; otherwise the open end simply dangles.
  bool anchor_when_open = false;
  Vec3 anchor_offset{0.0, 0.0, -1.0};
};

struct ContactModel {
  std::string name;  // "a|b"
};

struct ContactState {
  double normal_force = 0.0;
  double friction_force = 0.0;
};

// A joint that ablation may replace by a rigid weld: gluing adds `rows . v=0`
// over the entity's local coordinates.
struct GlueJoint {
  std::string id;
  std::string kind;  // "contact", "string", "pivot"
  Eigen::MatrixXd rows;
};

// One entity compiled to a block of generalized coordinates with its own
// dynamics. Cross-entity coupling happens only through port payout rows,
// which are linear with constant coefficients.
class EntityBlock {
 public:
  EntityBlock(std::string name, dsl::EntityKind kind, int ndof)
      : name_(std::move(name)), kind_(kind), ndof_(ndof) {}
  virtual ~EntityBlock() = default;

  const std::string& name() const { return name_; }
  dsl::EntityKind kind() const { return kind_; }
  int dof() const { return ndof_; }

  virtual void initial_state(VecRef q, VecRef v) const = 0;
  virtual void mass_matrix(double t, CVecRef q,
                           Eigen::Ref<Eigen::MatrixXd> M) const = 0;
  // Constant mass matrices let the solver factor the KKT system once.
  virtual bool mass_is_constant() const { return true; }
  virtual void force(double t, CVecRef q, CVecRef v, int mode,
                     VecRef f) const = 0;

  virtual std::vector<std::string> body_names() const = 0;
  virtual BodyState body_state(int body, double t, CVecRef q, CVecRef v,
                               CVecRef vdot, int mode) const = 0;

  virtual std::vector<StringModel> strings() const { return {}; }
  virtual StringState string_state(int i, double t, CVecRef q,
                                   CVecRef v) const {
    return {};
  }

  virtual std::vector<PortModel> ports() const { return {}; }

  virtual std::vector<ContactModel> contacts() const { return {}; }
  virtual void contact_state(double t, CVecRef q, CVecRef v, CVecRef vdot,
                             int mode, std::vector<ContactState>& out) const {}

  virtual std::vector<GlueJoint> glue_joints() const { return {}; }

  // Discrete events. event_value crossing from positive to <= 0 fires the
  // event; apply_event may change local velocities and the mode word.
  // `spike` marks an unmodeled-transition guard whose finite-difference
  // acceleration should be written into the trace.
  virtual int event_count() const { return 0; }
  virtual double event_value(int k, double t, CVecRef q, CVecRef v,
                             int mode) const {
    return 1.0;
  }
  virtual void apply_event(int k, double t, VecRef q, VecRef v, int& mode,
                           bool& spike) const {}

 private:
  std::string name_;
  dsl::EntityKind kind_;
  int ndof_;
};

// Factory over the entity registry. Throws SimulationError for kinds without
// a dynamics template.
std::unique_ptr<EntityBlock> build_entity_block(const dsl::EntitySpec& spec,
                                                const dsl::SceneSpec& scene);

struct State {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  std::vector<int> mode;  // one word per entity block
};

// Bookkeeping for a recordable string at scene level.
struct CompiledString {
  std::string name;
  int block = -1;       // owning block, -1 for cross-entity tendons/anchors
  int local_index = 0;  // index into the block's strings()
  int row = -1;         // constraint row whose multiplier is the tension
  double nominal_length = 0.0;  // tendons/anchors: initial geometric length
};

struct CompiledContact {
  std::string name;
  int block = 0;
  int local_index = 0;
};

struct CompiledBody {
  std::string name;  // "entity/body"
  int block = 0;
  int local_index = 0;
};

struct CompiledJoint {
  std::string id;    // "entity/..." or "tendon:a/p|b/q"
  std::string kind;  // "contact", "string", "pivot", "tendon"
  Eigen::MatrixXd rows;  // global weld rows
};

// An executable dynamical model: entity blocks over a global state vector,
// constant constraint rows, and recording metadata.
struct CompiledModel {
  dsl::SceneSpec scene;
  double dt = 1e-3;
  double horizon = 10.0;
  Vec3 gravity{0, 0, -kStandardGravity};

  std::vector<std::unique_ptr<EntityBlock>> blocks;
  std::vector<int> offsets;  // block -> first index in q/v
  int nq = 0;

  Eigen::MatrixXd constraints;       // rows: length_row (rate must vanish)
  Eigen::MatrixXd weld_rows;         // extra rows added by joint gluing
  std::vector<CompiledString> strings;
  std::vector<CompiledContact> contacts;
  std::vector<CompiledBody> bodies;
  std::vector<CompiledJoint> joints;

  State initial;

  int dof_count() const { return nq; }
  int constraint_count() const {
    return static_cast<int>(constraints.rows() + weld_rows.rows());
  }
  const CompiledBody* find_body(const std::string& name) const;
};

// Compiles a valid scene. dt/horizon <= 0 selects per-scene defaults
// (1e-3 s / 10 s; celestial scenes scale to the orbital period estimate).
// Throws SimulationError on unsupported kinds or inconsistent initial
// constraints.
CompiledModel compile(const dsl::SceneSpec& scene, double dt = 0.0,
                      double horizon = 0.0);

// Fixed-step RK4 integration with bisection event localization, recording
// every quantity at every grid point. On numerical blow-up the returned
// trace is truncated at the last finite sample with a diagnostic.
Trace simulate(const CompiledModel& model);

}  // namespace forge::sim
