#include "forge/sim/entity_base.hpp"

#include <cmath>

// Pulley, plane and block mechanisms. Coordinates are chosen so that kinetic
// energy is quadratic with a constant mass matrix and every cable length is
// affine in q; cross-entity coupling then stays a constant linear constraint.

namespace forge::sim {

namespace {

// ---------------------------------------------------------------------------
// mass_with_fixed_pulley: a fixed pulley; one cable side carries the mass
// system (single mass, chain, or spring-mass), the other side is the open
// port. Coordinates: cable payout s toward the mass side, plus the mass
// descent y for the spring variant (massless cable coordinate s is then
// pinned by an anchor or tendon).
// ---------------------------------------------------------------------------
class FixedPulleyBlock final : public EntityBlock {
 public:
  FixedPulleyBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind,
                    spec.params.at("mass_type").str() == "SpringMass"
                        ? 2
                        : static_cast<int>(
                              spec.params.at("mass_values").list().size())),
        g_(scene.g()),
        pos_(spec.position),
        masses_(spec.params.at("mass_values").list()),
        depth_(spec.params.at("hang_depth").number()),
        pulley_mass_(spec.params.at("pulley_mass").number()),
        spring_(spec.params.at("mass_type").str() == "SpringMass"),
        k_(spec.params.at("spring_constant").number()),
        l0_(spec.params.at("spring_natural_length").number()) {}

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    v.setZero();
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    if (spring_) {
      // q = (s, y); the cable coordinate s carries no inertia of its own.
      M(1, 1) = masses_[0];
    } else {
      for (std::size_t i = 0; i < masses_.size(); ++i) {
        M(i, i) = masses_[i];
      }
    }
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    if (spring_) {
      double ext = q[1] - q[0];
      f[0] = k_ * ext;               // spring pulls the cable end down
      f[1] = masses_[0] * g_ - k_ * ext;
    } else {
      for (std::size_t i = 0; i < masses_.size(); ++i) {
        f[i] = masses_[i] * g_;
      }
    }
    if (mode & 1) add_pin(f, q, v, jam_coord(), jam_stop(), total_mass());
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names{"pulley"};
    if (spring_) {
      names.push_back("mass_0");
    } else {
      for (std::size_t i = 0; i < masses_.size(); ++i) {
        names.push_back("mass_" + std::to_string(i));
      }
    }
    return names;
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body == 0) {  // the pulley housing, anchored
      s.position = pos_;
      s.mass = pulley_mass_;
      s.potential_energy = pulley_mass_ * g_ * pos_.z();
      return s;
    }
    int i = body - 1;
    double drop, dv, da;
    if (spring_) {
      drop = depth_ + l0_ + q[1];
      dv = v[1];
      da = vdot[1];
    } else {
      drop = depth_ + 0.4 * i + q[i];
      dv = v[i];
      da = vdot[i];
    }
    s.position = pos_ - Vec3(0, 0, drop);
    s.lin_vel = Vec3(0, 0, -dv);
    s.lin_acc = Vec3(0, 0, -da);
    s.mass = masses_[i];
    s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<StringModel> strings() const override {
    std::vector<StringModel> out;
    if (spring_) {
      out.push_back({"spring", false, Eigen::VectorXd()});
    } else {
      // chain links between consecutive masses
      for (std::size_t i = 0; i + 1 < masses_.size(); ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(dof());
        row[i] = -1.0;
        row[i + 1] = 1.0;
        out.push_back({"link_" + std::to_string(i), true, row});
      }
    }
    return out;
  }

  StringState string_state(int i, double, CVecRef q, CVecRef v) const override {
    StringState st;
    if (spring_) {
      double ext = q[1] - q[0];
      st.length = l0_ + ext;
      st.velocity = v[1] - v[0];
      st.force = k_ * ext;
      st.stiffness = k_;
    } else {
      st.length = 0.4 + q[i + 1] - q[i];
      st.velocity = v[i + 1] - v[i];
    }
    return st;
  }

  std::vector<PortModel> ports() const override {
    PortModel p;
    p.name = "cable_end";
    p.internal_row = Eigen::VectorXd::Zero(dof());
    p.internal_row[0] = 1.0;  // mass side consumes cable as it descends
    p.internal_length0 = depth_;
    p.guide_pos = pos_;
    p.anchor_when_open = true;
    p.anchor_offset = Vec3(0.3, 0, -1.0);
    return {p};
  }

  std::vector<GlueJoint> glue_joints() const override {
    std::vector<GlueJoint> out;
    if (!spring_) {
      for (std::size_t i = 0; i + 1 < masses_.size(); ++i) {
        Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, dof());
        rows(0, i) = 1.0;
        rows(0, i + 1) = -1.0;
        out.push_back({name() + "/link_" + std::to_string(i), "string", rows});
      }
    }
    return out;
  }

  int event_count() const override { return 1; }

  double event_value(int, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & 1) return 1.0;
    return depth_ + q[jam_coord()] - 0.05;  // top mass reaches the pulley
  }

  void apply_event(int, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= 1;
    spike = true;
  }

 private:
  int jam_coord() const { return spring_ ? 1 : 0; }
  double jam_stop() const { return 0.05 - depth_ - (spring_ ? l0_ : 0.0); }
  double total_mass() const {
    double m = 0;
    for (double mi : masses_) m += mi;
    return m;
  }

  double g_;
  Vec3 pos_;
  std::vector<double> masses_;
  double depth_, pulley_mass_;
  bool spring_;
  double k_, l0_;
};

// ---------------------------------------------------------------------------
// mass_with_movable_pulley / mass_with_reverse_movable_pulley.
// q = (s1, s2, p): descents of the two internal masses and the movable
// pulley displacement (up for the plain variant, down for the reverse one).
// Internal cable: s1 + s2 + 2p = const.
// ---------------------------------------------------------------------------
class MovablePulleyBlock final : public EntityBlock {
 public:
  MovablePulleyBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 3),
        g_(scene.g()),
        pos_(spec.position),
        masses_(spec.params.at("mass_values").list()),
        depth_(spec.params.at("hang_depth").number()),
        pulley_mass_(spec.params.at("pulley_mass").number()),
        reverse_(spec.kind == dsl::EntityKind::kMassWithReverseMovablePulley) {}

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    v.setZero();
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    M(0, 0) = masses_[0];
    M(1, 1) = masses_[1];
    M(2, 2) = pulley_mass_;
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    f[0] = masses_[0] * g_;
    f[1] = masses_[1] * g_;
    f[2] = reverse_ ? pulley_mass_ * g_ : -pulley_mass_ * g_;
    for (int i = 0; i < 2; ++i) {
      if (mode & (1 << i)) {
        add_pin(f, q, v, i, 0.05 - depth_, masses_[i]);
      }
    }
  }

  std::vector<std::string> body_names() const override {
    return {"fixed_pulley_a", "fixed_pulley_b", "movable_pulley", "mass_a",
            "mass_b"};
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    const double dx = 0.6;
    switch (body) {
      case 0:
      case 1:
        s.position = pos_ + Vec3(body == 0 ? -dx : dx, 0, 0);
        s.mass = 1.0;
        break;
      case 2: {
        double dz = reverse_ ? -(0.6 + q[2]) : (0.6 + q[2]);
        s.position = pos_ + Vec3(0, 0, dz);
        s.lin_vel = Vec3(0, 0, reverse_ ? -v[2] : v[2]);
        s.lin_acc = Vec3(0, 0, reverse_ ? -vdot[2] : vdot[2]);
        s.mass = pulley_mass_;
        break;
      }
      default: {
        int i = body - 3;
        s.position =
            pos_ + Vec3(i == 0 ? -dx : dx, 0, -(depth_ + q[i]));
        s.lin_vel = Vec3(0, 0, -v[i]);
        s.lin_acc = Vec3(0, 0, -vdot[i]);
        s.mass = masses_[i];
        break;
      }
    }
    s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<StringModel> strings() const override {
    Eigen::VectorXd row(3);
    row << 1.0, 1.0, 2.0;
    return {{"cable", true, row}};
  }

  StringState string_state(int, double, CVecRef q, CVecRef v) const override {
    StringState st;
    st.length = 2.0 * depth_ + 2.0 * 0.6;  // nominal path length
    st.velocity = v[0] + v[1] + 2.0 * v[2];
    return st;
  }

  std::vector<PortModel> ports() const override {
    PortModel p;
    p.name = reverse_ ? "load" : "top";
    p.internal_row = Eigen::VectorXd::Zero(3);
    p.internal_length0 = 0.0;
    p.guide_pos = pos_ + Vec3(0, 0, reverse_ ? -0.6 : 0.6);
    p.guide_vel_rows = Eigen::MatrixXd::Zero(3, 3);
    p.guide_vel_rows(2, 2) = reverse_ ? -1.0 : 1.0;
    p.anchor_when_open = !reverse_;  // an unheld movable pulley cannot hang
    p.anchor_offset = Vec3(0, 0, reverse_ ? -1.0 : 1.0);
    return {p};
  }

  std::vector<GlueJoint> glue_joints() const override {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
    rows(0, 0) = 1.0;
    rows(0, 1) = -1.0;  // weld the two suspended masses together
    return {{name() + "/cable", "string", rows}};
  }

  int event_count() const override { return 2; }

  double event_value(int k, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & (1 << k)) return 1.0;
    return depth_ + q[k] - 0.05;
  }

  void apply_event(int k, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= (1 << k);
    spike = true;
  }

 private:
  double g_;
  Vec3 pos_;
  std::vector<double> masses_;
  double depth_, pulley_mass_;
  bool reverse_;
};

// ---------------------------------------------------------------------------
// two_side_mass_plane: block on a fixed incline, cable guides at both edges.
// q = (s), displacement along the face, uphill positive.
// ---------------------------------------------------------------------------
class InclineBlock final : public EntityBlock {
 public:
  InclineBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 1),
        g_(scene.g()),
        pos_(spec.position),
        m_(spec.params.at("mass").number()),
        alpha_(spec.params.at("incline_angle").number()),
        mu_(spec.params.at("friction_coefficient").number()),
        face_(spec.params.at("face_length").number()),
        v0_(spec.params.at("initial_velocity").number()) {}

  void initial_state(VecRef q, VecRef v) const override {
    q[0] = 0.0;
    v[0] = v0_;
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M(0, 0) = m_;
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    f[0] = -m_ * g_ * std::sin(alpha_) + friction(v[0]);
    if (mode & 1) add_pin(f, q, v, 0, face_ / 2 - 0.05, m_);
    if (mode & 2) add_pin(f, q, v, 0, -(face_ / 2 - 0.05), m_);
  }

  std::vector<std::string> body_names() const override {
    return {"plane", "block"};
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body == 0) {
      s.position = pos_;
      s.mass = 0.0;  // immobile support
      return s;
    }
    Vec3 uphill(std::cos(alpha_), 0, std::sin(alpha_));
    s.position = pos_ + uphill * q[0];
    s.lin_vel = uphill * v[0];
    s.lin_acc = uphill * vdot[0];
    s.mass = m_;
    s.potential_energy = m_ * g_ * s.position.z();
    return s;
  }

  std::vector<PortModel> ports() const override {
    Vec3 uphill(std::cos(alpha_), 0, std::sin(alpha_));
    PortModel top;
    top.name = "top";
    top.internal_row = Eigen::VectorXd::Constant(1, -1.0);
    top.internal_length0 = face_ / 2;
    top.guide_pos = pos_ + uphill * (face_ / 2);
    top.anchor_offset = Vec3(0, 0, -0.8);
    PortModel bottom;
    bottom.name = "bottom";
    bottom.internal_row = Eigen::VectorXd::Constant(1, 1.0);
    bottom.internal_length0 = face_ / 2;
    bottom.guide_pos = pos_ - uphill * (face_ / 2);
    bottom.anchor_offset = Vec3(0, 0, -0.8);
    return {top, bottom};
  }

  std::vector<ContactModel> contacts() const override {
    return {{"block|plane"}};
  }

  void contact_state(double, CVecRef, CVecRef v, CVecRef, int,
                     std::vector<ContactState>& out) const override {
    out[0].normal_force = m_ * g_ * std::cos(alpha_);
    out[0].friction_force = friction(v[0]);
  }

  std::vector<GlueJoint> glue_joints() const override {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(1, 1);
    return {{name() + "/block|plane", "contact", rows}};
  }

  int event_count() const override { return 2; }

  double event_value(int k, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & (1 << k)) return 1.0;
    return k == 0 ? (face_ / 2 - 0.05) - q[0] : q[0] + (face_ / 2 - 0.05);
  }

  void apply_event(int k, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= (1 << k);
    spike = true;
  }

 private:
  double friction(double vel) const {
    return -mu_ * m_ * g_ * std::cos(alpha_) * smooth_sign(vel);
  }

  double g_;
  Vec3 pos_;
  double m_, alpha_, mu_, face_, v0_;
};

// ---------------------------------------------------------------------------
// stacked_mass_plane: blocks stacked on a horizontal plane, Coulomb friction
// at every interface. q = (x_0 ... x_{n-1}), bottom block first.
// ---------------------------------------------------------------------------
class StackedBlocks final : public EntityBlock {
 public:
  StackedBlocks(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind,
                    static_cast<int>(spec.params.at("masses").list().size())),
        g_(scene.g()),
        pos_(spec.position),
        masses_(spec.params.at("masses").list()),
        mus_(spec.params.at("friction_coefficients").list()),
        v0_(spec.params.at("initial_velocities").list()),
        length_(spec.params.at("block_length").number()),
        width_(spec.params.at("block_width").number()),
        height_(spec.params.at("block_height").number()) {}

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    for (int i = 0; i < dof(); ++i) v[i] = v0_[i];
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    for (int i = 0; i < dof(); ++i) M(i, i) = masses_[i];
  }

  void force(double, CVecRef, CVecRef v, int, VecRef f) const override {
    f.setZero();
    int n = dof();
    // interface i sits below block i; i = 0 is block|ground
    for (int i = 0; i < n; ++i) {
      double below = i == 0 ? 0.0 : v[i - 1];
      double fr = -mus_[i] * normal(i) * smooth_sign(v[i] - below);
      f[i] += fr;
      if (i > 0) f[i - 1] -= fr;
    }
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names{"plane"};
    for (int i = 0; i < dof(); ++i) {
      names.push_back("block_" + std::to_string(i));
    }
    return names;
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body == 0) {
      s.position = pos_;
      s.mass = 0.0;
      return s;
    }
    int i = body - 1;
    s.position = pos_ + Vec3(q[i], 0, height_ * (i + 0.5));
    s.lin_vel = Vec3(v[i], 0, 0);
    s.lin_acc = Vec3(vdot[i], 0, 0);
    s.mass = masses_[i];
    // cuboid inertia about COM
    double w2 = width_ * width_, l2 = length_ * length_, h2 = height_ * height_;
    s.inertia = (masses_[i] / 12.0) *
                Vec3(w2 + h2, l2 + h2, l2 + w2).asDiagonal().toDenseMatrix();
    s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<PortModel> ports() const override {
    std::vector<PortModel> out;
    const double plane_half = 4.0;
    for (int i = 0; i < dof(); ++i) {
      for (int side = 0; side < 2; ++side) {
        PortModel p;
        p.name = (side == 0 ? "left_" : "right_") + std::to_string(i);
        p.internal_row = Eigen::VectorXd::Zero(dof());
        p.internal_row[i] = side == 0 ? 1.0 : -1.0;
        p.internal_length0 = plane_half;
        p.guide_pos =
            pos_ + Vec3(side == 0 ? -plane_half : plane_half, 0,
                        height_ * (i + 0.5));
        p.anchor_offset =
            Vec3(side == 0 ? -0.3 : 0.3, 0, 0);
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  std::vector<ContactModel> contacts() const override {
    std::vector<ContactModel> out{{"block_0|plane"}};
    for (int i = 1; i < dof(); ++i) {
      out.push_back({"block_" + std::to_string(i) + "|block_" +
                     std::to_string(i - 1)});
    }
    return out;
  }

  void contact_state(double, CVecRef, CVecRef v, CVecRef, int,
                     std::vector<ContactState>& out) const override {
    for (int i = 0; i < dof(); ++i) {
      double below = i == 0 ? 0.0 : v[i - 1];
      out[i].normal_force = normal(i);
      out[i].friction_force = -mus_[i] * normal(i) * smooth_sign(v[i] - below);
    }
  }

  std::vector<GlueJoint> glue_joints() const override {
    std::vector<GlueJoint> out;
    for (int i = 0; i < dof(); ++i) {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, dof());
      rows(0, i) = 1.0;
      std::string id;
      if (i == 0) {
        id = name() + "/block_0|plane";
      } else {
        rows(0, i - 1) = -1.0;
        id = name() + "/block_" + std::to_string(i) + "|block_" +
             std::to_string(i - 1);
      }
      out.push_back({id, "contact", rows});
    }
    return out;
  }

  int event_count() const override { return std::max(0, dof() - 1); }

  double event_value(int k, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & (1 << k)) return 1.0;
    return length_ / 2 - std::abs(q[k + 1] - q[k]);  // upper block slides off
  }

  void apply_event(int, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= ~0;  // freeze the whole stack; the trace suffix gets pruned
    spike = true;
  }

 private:
  // weight carried by interface i (all blocks from i upward)
  double normal(int i) const {
    double w = 0;
    for (int j = i; j < dof(); ++j) w += masses_[j];
    return w * g_;
  }

  double g_;
  Vec3 pos_;
  std::vector<double> masses_, mus_, v0_;
  double length_, width_, height_;
};

// ---------------------------------------------------------------------------
// directed_mass: one block suspended from two fixed pulleys; both far cable
// ends are ports. Cables are treated as vertical. q = (y), block descent.
// ---------------------------------------------------------------------------
class DirectedMassBlock final : public EntityBlock {
 public:
  DirectedMassBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 1),
        g_(scene.g()),
        pos_(spec.position),
        m_(spec.params.at("mass").number()),
        sep_(spec.params.at("pulley_separation").number()),
        depth_(spec.params.at("hang_depth").number()) {}

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    v.setZero();
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M(0, 0) = m_;
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    f[0] = m_ * g_;
    if (mode & 1) add_pin(f, q, v, 0, 0.05 - depth_, m_);
  }

  std::vector<std::string> body_names() const override {
    return {"pulley_a", "pulley_b", "block"};
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body < 2) {
      s.position = pos_ + Vec3(body == 0 ? -sep_ / 2 : sep_ / 2, 0, 0);
      s.mass = 1.0;
      s.potential_energy = s.mass * g_ * s.position.z();
      return s;
    }
    s.position = pos_ - Vec3(0, 0, depth_ + q[0]);
    s.lin_vel = Vec3(0, 0, -v[0]);
    s.lin_acc = Vec3(0, 0, -vdot[0]);
    s.mass = m_;
    s.potential_energy = m_ * g_ * s.position.z();
    return s;
  }

  std::vector<PortModel> ports() const override {
    std::vector<PortModel> out;
    for (int side = 0; side < 2; ++side) {
      PortModel p;
      p.name = side == 0 ? "end_a" : "end_b";
      p.internal_row = Eigen::VectorXd::Constant(1, 1.0);
      p.internal_length0 = depth_;
      p.guide_pos = pos_ + Vec3(side == 0 ? -sep_ / 2 : sep_ / 2, 0, 0);
      p.anchor_when_open = true;
      p.anchor_offset = Vec3(side == 0 ? -0.3 : 0.3, 0, -1.0);
      out.push_back(std::move(p));
    }
    return out;
  }

  int event_count() const override { return 1; }

  double event_value(int, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & 1) return 1.0;
    return depth_ + q[0] - 0.05;
  }

  void apply_event(int, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= 1;
    spike = true;
  }

 private:
  double g_;
  Vec3 pos_;
  double m_, sep_, depth_;
};

// ---------------------------------------------------------------------------
// mass_prism_plane: movable wedge on a frictionless floor, blocks on its
// faces, optionally joined by a string over the apex.
// q = (X, sL, sR): wedge position, block displacement up the left face,
// block displacement down the right face (both relative to the wedge).
// ---------------------------------------------------------------------------
class WedgeBlock final : public EntityBlock {
 public:
  WedgeBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 3),
        g_(scene.g()),
        pos_(spec.position),
        wedge_m_(spec.params.at("wedge_mass").number()),
        al_(spec.params.at("left_angle").number()),
        ar_(spec.params.at("right_angle").number()),
        ml_(spec.params.count("left_mass")
                ? spec.params.at("left_mass").number()
                : 0.0),
        mr_(spec.params.count("right_mass")
                ? spec.params.at("right_mass").number()
                : 0.0),
        mu_(spec.params.at("friction_coefficient").number()),
        face_(spec.params.at("face_length").number()) {}

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    v.setZero();
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    double cl = std::cos(al_), cr = std::cos(ar_);
    M.setZero();
    M(0, 0) = wedge_m_ + ml_ + mr_;
    M(0, 1) = M(1, 0) = ml_ * cl;
    M(0, 2) = M(2, 0) = mr_ * cr;
    // an absent block leaves a massless coordinate; pin it with a unit mass
    M(1, 1) = ml_ > 0 ? ml_ : 1.0;
    M(2, 2) = mr_ > 0 ? mr_ : 1.0;
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    f[0] = 0.0;
    f[1] = ml_ > 0 ? -ml_ * g_ * std::sin(al_) + friction(ml_, al_, v[1]) : 0.0;
    f[2] = mr_ > 0 ? mr_ * g_ * std::sin(ar_) + friction(mr_, ar_, v[2]) : 0.0;
    if (mode & 1) add_pin(f, q, v, 1, face_ / 2 - 0.05, std::max(ml_, 1.0));
    if (mode & 2) add_pin(f, q, v, 2, face_ / 2 - 0.05, std::max(mr_, 1.0));
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names{"wedge"};
    if (ml_ > 0) names.push_back("block_left");
    if (mr_ > 0) names.push_back("block_right");
    return names;
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body == 0) {
      s.position = pos_ + Vec3(q[0], 0, 0.4);
      s.lin_vel = Vec3(v[0], 0, 0);
      s.lin_acc = Vec3(vdot[0], 0, 0);
      s.mass = wedge_m_;
      s.potential_energy = wedge_m_ * g_ * s.position.z();
      return s;
    }
    bool left = (body == 1 && ml_ > 0);
    int ci = left ? 1 : 2;
    Vec3 u = face_unit(left);
    Vec3 apex = pos_ + Vec3(q[0], 0, apex_height());
    Vec3 rel = left ? Vec3(-u * (face_ / 2 - q[1]))
                    : Vec3(u * (face_ / 2 + q[2]));
    s.position = apex + rel;
    s.lin_vel = Vec3(v[0], 0, 0) + u * v[ci] * (left ? 1.0 : 1.0);
    s.lin_acc = Vec3(vdot[0], 0, 0) + u * vdot[ci];
    s.mass = left ? ml_ : mr_;
    s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<StringModel> strings() const override {
    if (ml_ <= 0 || mr_ <= 0) return {};
    Eigen::VectorXd row(3);
    row << 0.0, -1.0, 1.0;  // left block up <=> right block down
    return {{"string", true, row}};
  }

  StringState string_state(int, double, CVecRef q, CVecRef v) const override {
    StringState st;
    st.length = face_;  // nominal over-the-apex path
    st.velocity = v[2] - v[1];
    return st;
  }

  std::vector<ContactModel> contacts() const override {
    std::vector<ContactModel> out;
    if (ml_ > 0) out.push_back({"block_left|wedge"});
    if (mr_ > 0) out.push_back({"block_right|wedge"});
    out.push_back({"wedge|ground"});
    return out;
  }

  void contact_state(double, CVecRef, CVecRef v, CVecRef vdot, int,
                     std::vector<ContactState>& out) const override {
    std::size_t idx = 0;
    if (ml_ > 0) {
      Vec3 n(-std::sin(al_), 0, std::cos(al_));
      Vec3 a = Vec3(vdot[0], 0, 0) + face_unit(true) * vdot[1];
      double N = ml_ * (a + Vec3(0, 0, g_)).dot(n);
      out[idx].normal_force = N;
      out[idx].friction_force = friction(ml_, al_, v[1]);
      ++idx;
    }
    if (mr_ > 0) {
      Vec3 n(std::sin(ar_), 0, std::cos(ar_));
      Vec3 a = Vec3(vdot[0], 0, 0) + face_unit(false) * vdot[2];
      double N = mr_ * (a + Vec3(0, 0, g_)).dot(n);
      out[idx].normal_force = N;
      out[idx].friction_force = friction(mr_, ar_, v[2]);
      ++idx;
    }
    // vertical support: sum of m(g + a_z) over all parts
    double Ng = wedge_m_ * g_;
    if (ml_ > 0) Ng += ml_ * (g_ + std::sin(al_) * vdot[1]);
    if (mr_ > 0) Ng += mr_ * (g_ - std::sin(ar_) * vdot[2]);
    out[idx].normal_force = Ng;
    out[idx].friction_force = 0.0;
  }

  std::vector<GlueJoint> glue_joints() const override {
    std::vector<GlueJoint> out;
    if (ml_ > 0) {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
      rows(0, 1) = 1.0;
      out.push_back({name() + "/block_left|wedge", "contact", rows});
    }
    if (mr_ > 0) {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
      rows(0, 2) = 1.0;
      out.push_back({name() + "/block_right|wedge", "contact", rows});
    }
    {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
      rows(0, 0) = 1.0;
      out.push_back({name() + "/wedge|ground", "contact", rows});
    }
    if (ml_ > 0 && mr_ > 0) {
      // a rigid rod in place of the string: endpoints move together
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 3);
      rows(0, 1) = std::cos(al_);
      rows(0, 2) = -std::cos(ar_);
      rows(1, 1) = std::sin(al_);
      rows(1, 2) = std::sin(ar_);
      out.push_back({name() + "/string", "string", rows});
    }
    return out;
  }

  int event_count() const override { return 2; }

  double event_value(int k, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & (1 << k)) return 1.0;
    if (k == 0) {
      if (ml_ <= 0) return 1.0;
      return face_ / 2 - 0.05 - std::abs(q[1]);
    }
    if (mr_ <= 0) return 1.0;
    return face_ / 2 - 0.05 - std::abs(q[2]);
  }

  void apply_event(int k, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= (1 << k);
    spike = true;
  }

 private:
  Vec3 face_unit(bool left) const {
    // unit vector pointing up the face toward the apex (left face) or down
    // away from the apex (right face)
    return left ? Vec3(std::cos(al_), 0, std::sin(al_))
                : Vec3(std::cos(ar_), 0, -std::sin(ar_));
  }
  double apex_height() const {
    return 0.5 * face_ * std::max(std::sin(al_), std::sin(ar_)) + 0.2;
  }
  double friction(double m, double alpha, double vel) const {
    if (m <= 0 || mu_ <= 0) return 0.0;
    // quasi-static normal estimate; the recorded contact normal is exact
    return -mu_ * m * g_ * std::cos(alpha) * smooth_sign(vel);
  }

  double g_;
  Vec3 pos_;
  double wedge_m_, al_, ar_, ml_, mr_, mu_, face_;
};

// ---------------------------------------------------------------------------
// mass_box_plane: large block on a frictionless floor, one block on top and
// one hanging on the side, joined by a string over a corner guide.
// q = (X, s1, s2): box position, top-block slide, side-block descent.
// ---------------------------------------------------------------------------
class BoxPlaneBlock final : public EntityBlock {
 public:
  BoxPlaneBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 3),
        g_(scene.g()),
        pos_(spec.position),
        box_m_(spec.params.at("box_mass").number()),
        top_m_(spec.params.at("top_mass").number()),
        side_m_(spec.params.at("side_mass").number()),
        mu_(spec.params.at("friction_coefficient").number()) {}

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    v.setZero();
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    M(0, 0) = box_m_ + top_m_ + side_m_;
    M(0, 1) = M(1, 0) = top_m_;
    M(1, 1) = top_m_;
    M(2, 2) = side_m_;
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    double fr = -mu_ * top_m_ * g_ * smooth_sign(v[1]);
    f[0] = 0.0;
    f[1] = fr;
    f[2] = side_m_ * g_;
    if (mode & 1) add_pin(f, q, v, 1, 1.15, top_m_);
    if (mode & 2) add_pin(f, q, v, 2, 1.45, side_m_);
  }

  std::vector<std::string> body_names() const override {
    return {"box", "top_block", "side_block"};
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    const double h = 1.0, half = 0.6;
    switch (body) {
      case 0:
        s.position = pos_ + Vec3(q[0], 0, h / 2);
        s.lin_vel = Vec3(v[0], 0, 0);
        s.lin_acc = Vec3(vdot[0], 0, 0);
        s.mass = box_m_;
        break;
      case 1:
        s.position = pos_ + Vec3(q[0] + q[1] - half / 2, 0, h + 0.1);
        s.lin_vel = Vec3(v[0] + v[1], 0, 0);
        s.lin_acc = Vec3(vdot[0] + vdot[1], 0, 0);
        s.mass = top_m_;
        break;
      default:
        s.position = pos_ + Vec3(q[0] + half + 0.1, 0, h / 2 - q[2]);
        s.lin_vel = Vec3(v[0], 0, -v[2]);
        s.lin_acc = Vec3(vdot[0], 0, -vdot[2]);
        s.mass = side_m_;
        break;
    }
    s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<StringModel> strings() const override {
    Eigen::VectorXd row(3);
    row << 0.0, -1.0, 1.0;  // top block toward the corner <=> side block down
    return {{"string", true, row}};
  }

  StringState string_state(int, double, CVecRef, CVecRef v) const override {
    StringState st;
    st.length = 1.2;
    st.velocity = v[2] - v[1];
    return st;
  }

  std::vector<ContactModel> contacts() const override {
    return {{"top_block|box"}, {"side_block|box"}, {"box|ground"}};
  }

  void contact_state(double, CVecRef, CVecRef v, CVecRef vdot, int,
                     std::vector<ContactState>& out) const override {
    out[0].normal_force = top_m_ * g_;
    out[0].friction_force = -mu_ * top_m_ * g_ * smooth_sign(v[1]);
    out[1].normal_force = side_m_ * vdot[0];  // face presses the hanging block
    out[1].friction_force = 0.0;
    out[2].normal_force =
        (box_m_ + top_m_) * g_ + side_m_ * (g_ - vdot[2]);
    out[2].friction_force = 0.0;
  }

  std::vector<GlueJoint> glue_joints() const override {
    std::vector<GlueJoint> out;
    {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
      rows(0, 1) = 1.0;
      out.push_back({name() + "/top_block|box", "contact", rows});
    }
    {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
      rows(0, 2) = 1.0;
      out.push_back({name() + "/side_block|box", "contact", rows});
    }
    {
      Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1, 3);
      rows(0, 0) = 1.0;
      out.push_back({name() + "/box|ground", "contact", rows});
    }
    return out;
  }

  int event_count() const override { return 2; }

  double event_value(int k, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & (1 << k)) return 1.0;
    return k == 0 ? 1.2 - std::abs(q[1]) : 1.5 - q[2];
  }

  void apply_event(int k, double, VecRef, VecRef v, int& mode,
                   bool& spike) const override {
    v.setZero();
    mode |= (1 << k);
    spike = true;
  }

 private:
  double g_;
  Vec3 pos_;
  double box_m_, top_m_, side_m_, mu_;
};

}  // namespace

std::unique_ptr<EntityBlock> build_mech_block(const dsl::EntitySpec& spec,
                                              const dsl::SceneSpec& scene) {
  switch (spec.kind) {
    case dsl::EntityKind::kMassWithFixedPulley:
      return std::make_unique<FixedPulleyBlock>(spec, scene);
    case dsl::EntityKind::kMassWithMovablePulley:
    case dsl::EntityKind::kMassWithReverseMovablePulley:
      return std::make_unique<MovablePulleyBlock>(spec, scene);
    case dsl::EntityKind::kTwoSideMassPlane:
      return std::make_unique<InclineBlock>(spec, scene);
    case dsl::EntityKind::kStackedMassPlane:
      return std::make_unique<StackedBlocks>(spec, scene);
    case dsl::EntityKind::kDirectedMass:
      return std::make_unique<DirectedMassBlock>(spec, scene);
    case dsl::EntityKind::kMassPrismPlane:
      return std::make_unique<WedgeBlock>(spec, scene);
    case dsl::EntityKind::kMassBoxPlane:
      return std::make_unique<BoxPlaneBlock>(spec, scene);
    default:
      return nullptr;
  }
}

}  // namespace forge::sim
