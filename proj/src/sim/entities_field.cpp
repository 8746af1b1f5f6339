#include "forge/sim/entity_base.hpp"

#include <cmath>
#include <numbers>

// Collision benches, celestial systems, rockets, pendulums, rollers and
// charged particles.

namespace forge::sim {

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == ',' || c == '\t') {
      if (!cur.empty()) out.push_back(cur), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------------
// twoD_collision_plane: spheres on a frictionless horizontal plane with
// restitution collisions. q = (x_0, y_0, x_1, y_1, ...).
// ---------------------------------------------------------------------------
class PlanarCollisionBlock final : public EntityBlock {
 public:
  PlanarCollisionBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind,
                    2 * static_cast<int>(spec.params.at("masses").list().size())),
        g_(scene.g()),
        pos_(spec.position),
        masses_(spec.params.at("masses").list()),
        radii_(spec.params.at("radii").list()),
        p0_(spec.params.at("initial_positions").list()),
        v0_(spec.params.at("initial_velocities").list()),
        e_(spec.params.at("restitution").number()) {
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      for (std::size_t j = i + 1; j < masses_.size(); ++j) {
        pairs_.emplace_back(i, j);
      }
    }
  }

  void initial_state(VecRef q, VecRef v) const override {
    for (int i = 0; i < dof(); ++i) {
      q[i] = p0_[i];
      v[i] = v0_[i];
    }
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      M(2 * i, 2 * i) = masses_[i];
      M(2 * i + 1, 2 * i + 1) = masses_[i];
    }
  }

  void force(double, CVecRef, CVecRef, int, VecRef f) const override {
    f.setZero();  // the plane carries the weight
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names{"plane"};
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      names.push_back("ball_" + std::to_string(i));
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
    s.position = pos_ + Vec3(q[2 * i], q[2 * i + 1], radii_[i]);
    s.lin_vel = Vec3(v[2 * i], v[2 * i + 1], 0);
    s.lin_acc = Vec3(vdot[2 * i], vdot[2 * i + 1], 0);
    s.mass = masses_[i];
    double I = 0.4 * masses_[i] * radii_[i] * radii_[i];
    s.inertia = Mat3::Identity() * I;
    s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<ContactModel> contacts() const override {
    std::vector<ContactModel> out;
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      out.push_back({"ball_" + std::to_string(i) + "|plane"});
    }
    return out;
  }

  void contact_state(double, CVecRef, CVecRef, CVecRef, int,
                     std::vector<ContactState>& out) const override {
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      out[i].normal_force = masses_[i] * g_;
    }
  }

  int event_count() const override { return static_cast<int>(pairs_.size()); }

  double event_value(int k, double, CVecRef q, CVecRef, int) const override {
    auto [i, j] = pairs_[k];
    double dx = q[2 * i] - q[2 * j];
    double dy = q[2 * i + 1] - q[2 * j + 1];
    return std::hypot(dx, dy) - (radii_[i] + radii_[j]);
  }

  void apply_event(int k, double, VecRef q, VecRef v, int&,
                   bool&) const override {
    auto [i, j] = pairs_[k];
    Vec3 n(q[2 * i] - q[2 * j], q[2 * i + 1] - q[2 * j + 1], 0);
    double d = n.norm();
    if (d < 1e-12) return;
    n /= d;
    Vec3 rel(v[2 * i] - v[2 * j], v[2 * i + 1] - v[2 * j + 1], 0);
    double vn = rel.dot(n);
    if (vn >= 0) return;  // already separating
    double imp = -(1.0 + e_) * vn / (1.0 / masses_[i] + 1.0 / masses_[j]);
    v[2 * i] += imp * n.x() / masses_[i];
    v[2 * i + 1] += imp * n.y() / masses_[i];
    v[2 * j] -= imp * n.x() / masses_[j];
    v[2 * j + 1] -= imp * n.y() / masses_[j];
  }

 private:
  double g_;
  Vec3 pos_;
  std::vector<double> masses_, radii_, p0_, v0_;
  double e_;
  std::vector<std::pair<int, int>> pairs_;
};

// ---------------------------------------------------------------------------
// complex_collision_plane: a 1D bench of blocks, spheres, fixed walls and
// spring-bumper blocks. Moving objects get one coordinate each.
// ---------------------------------------------------------------------------
class LinearCollisionBlock final : public EntityBlock {
 public:
  LinearCollisionBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind,
                    static_cast<int>([&] {
                      int n = 0;
                      for (const auto& t :
                           split_tokens(spec.params.at("object_types").str())) {
                        if (t != "wall") ++n;
                      }
                      return n;
                    }())),
        g_(scene.g()),
        pos_(spec.position),
        types_(split_tokens(spec.params.at("object_types").str())),
        masses_(spec.params.at("masses").list()),
        sizes_(spec.params.at("sizes").list()),
        p0_(spec.params.at("initial_positions").list()),
        v0_(spec.params.at("initial_velocities").list()),
        ks_(spec.params.at("spring_constants").list()),
        l0s_(spec.params.at("spring_lengths").list()),
        e_(spec.params.at("restitution").number()) {
    coord_.assign(types_.size(), -1);
    int c = 0;
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (types_[i] != "wall") coord_[i] = c++;
    }
    for (std::size_t i = 0; i + 1 < types_.size(); ++i) {
      // adjacent pairs; a spring bumper mediates the pair to its left
      bool spring = types_[i + 1] == "spring_block";
      pairs_.push_back({static_cast<int>(i), static_cast<int>(i) + 1, spring});
    }
  }

  void initial_state(VecRef q, VecRef v) const override {
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (coord_[i] >= 0) {
        q[coord_[i]] = p0_[i];
        v[coord_[i]] = v0_[i];
      }
    }
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (coord_[i] >= 0) M(coord_[i], coord_[i]) = masses_[i];
    }
  }

  void force(double, CVecRef q, CVecRef, int, VecRef f) const override {
    f.setZero();
    for (const auto& pr : pairs_) {
      if (!pr.spring) continue;
      double c = compression(pr, q);
      if (c <= 0) continue;
      double F = ks_[pr.right] * c;  // pushes the pair apart
      if (coord_[pr.left] >= 0) f[coord_[pr.left]] -= F;
      if (coord_[pr.right] >= 0) f[coord_[pr.right]] += F;
    }
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names{"plane"};
    for (std::size_t i = 0; i < types_.size(); ++i) {
      names.push_back(types_[i] + "_" + std::to_string(i));
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
    double x = coord_[i] >= 0 ? q[coord_[i]] : p0_[i];
    s.position = pos_ + Vec3(x, 0, sizes_[i]);
    if (coord_[i] >= 0) {
      s.lin_vel = Vec3(v[coord_[i]], 0, 0);
      s.lin_acc = Vec3(vdot[coord_[i]], 0, 0);
      s.mass = masses_[i];
    } else {
      s.mass = 0.0;  // fixed wall
    }
    if (types_[i] == "sphere") {
      double I = 0.4 * masses_[i] * sizes_[i] * sizes_[i];
      s.inertia = Mat3::Identity() * I;
    }
    if (coord_[i] >= 0) s.potential_energy = s.mass * g_ * s.position.z();
    return s;
  }

  std::vector<StringModel> strings() const override {
    std::vector<StringModel> out;
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (types_[i] == "spring_block") {
        out.push_back(
            {"spring_" + std::to_string(i), false, Eigen::VectorXd()});
      }
    }
    return out;
  }

  StringState string_state(int s, double, CVecRef q, CVecRef v) const override {
    // the s-th spring bumper, attached to the left face of its block
    int seen = -1;
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (types_[i] != "spring_block") continue;
      if (++seen == s) {
        StringState st;
        st.stiffness = ks_[i];
        Pair pr{static_cast<int>(i) - 1, static_cast<int>(i), true};
        if (i == 0) {
          st.length = l0s_[i];
          return st;
        }
        double c = compression(pr, q);
        st.length = l0s_[i] - std::max(0.0, c);
        st.force = ks_[i] * std::max(0.0, c);
        double vl = coord_[pr.left] >= 0 ? v[coord_[pr.left]] : 0.0;
        double vr = coord_[pr.right] >= 0 ? v[coord_[pr.right]] : 0.0;
        st.velocity = vr - vl;
        return st;
      }
    }
    return {};
  }

  int event_count() const override { return static_cast<int>(pairs_.size()); }

  double event_value(int k, double, CVecRef q, CVecRef, int) const override {
    const Pair& pr = pairs_[k];
    if (pr.spring) return 1.0;  // handled by the spring force
    return gap(pr, q);
  }

  void apply_event(int k, double, VecRef q, VecRef v, int&,
                   bool&) const override {
    const Pair& pr = pairs_[k];
    double mi = masses_[pr.left], mj = masses_[pr.right];
    double wi = coord_[pr.left] >= 0 ? 1.0 / mi : 0.0;
    double wj = coord_[pr.right] >= 0 ? 1.0 / mj : 0.0;
    if (wi + wj == 0) return;
    double vi = coord_[pr.left] >= 0 ? v[coord_[pr.left]] : 0.0;
    double vj = coord_[pr.right] >= 0 ? v[coord_[pr.right]] : 0.0;
    double vn = vi - vj;  // approach speed (left moving into right)
    if (vn <= 0) return;
    double imp = (1.0 + e_) * vn / (wi + wj);
    if (coord_[pr.left] >= 0) v[coord_[pr.left]] -= imp * wi;
    if (coord_[pr.right] >= 0) v[coord_[pr.right]] += imp * wj;
  }

 private:
  struct Pair {
    int left, right;
    bool spring;
  };

  double xpos(int i, CVecRef q) const {
    return coord_[i] >= 0 ? q[coord_[i]] : p0_[i];
  }
  double gap(const Pair& pr, CVecRef q) const {
    return (xpos(pr.right, q) - sizes_[pr.right]) -
           (xpos(pr.left, q) + sizes_[pr.left]);
  }
  double compression(const Pair& pr, CVecRef q) const {
    if (pr.left < 0) return 0.0;
    return l0s_[pr.right] - gap(pr, q);
  }

  double g_;
  Vec3 pos_;
  std::vector<std::string> types_;
  std::vector<double> masses_, sizes_, p0_, v0_, ks_, l0s_;
  double e_;
  std::vector<int> coord_;
  std::vector<Pair> pairs_;
};

// ---------------------------------------------------------------------------
// solar_system: a stationary star and planets under pairwise Newtonian
// gravity, planar. q = (x_0, y_0, ...). Scene gravity does not apply.
// ---------------------------------------------------------------------------
class SolarSystemBlock final : public EntityBlock {
 public:
  SolarSystemBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec&)
      : EntityBlock(spec.name, spec.kind,
                    2 * static_cast<int>(
                            spec.params.at("planet_masses").list().size())),
        pos_(spec.position),
        star_m_(spec.params.at("star_mass").number()),
        masses_(spec.params.at("planet_masses").list()),
        radii_(spec.params.at("orbit_radii").list()),
        factors_(spec.params.at("speed_factors").list()) {}

  void initial_state(VecRef q, VecRef v) const override {
    std::size_t n = masses_.size();
    for (std::size_t i = 0; i < n; ++i) {
      double phi = 2.0 * std::numbers::pi * static_cast<double>(i) /
                   static_cast<double>(n);
      double vc = std::sqrt(kGravitationalConstant * star_m_ / radii_[i]);
      q[2 * i] = radii_[i] * std::cos(phi);
      q[2 * i + 1] = radii_[i] * std::sin(phi);
      v[2 * i] = -factors_[i] * vc * std::sin(phi);
      v[2 * i + 1] = factors_[i] * vc * std::cos(phi);
    }
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      M(2 * i, 2 * i) = masses_[i];
      M(2 * i + 1, 2 * i + 1) = masses_[i];
    }
  }

  void force(double, CVecRef q, CVecRef, int, VecRef f) const override {
    f.setZero();
    const double G = kGravitationalConstant;
    std::size_t n = masses_.size();
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Vector2d ri(q[2 * i], q[2 * i + 1]);
      double r = ri.norm();
      Eigen::Vector2d a = -G * star_m_ * masses_[i] / (r * r * r) * ri;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        Eigen::Vector2d rj(q[2 * j], q[2 * j + 1]);
        Eigen::Vector2d d = rj - ri;
        double dist = d.norm();
        a += G * masses_[i] * masses_[j] / (dist * dist * dist) * d;
      }
      f[2 * i] = a.x();
      f[2 * i + 1] = a.y();
    }
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names{"star"};
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      names.push_back("planet_" + std::to_string(i));
    }
    return names;
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    const double G = kGravitationalConstant;
    if (body == 0) {
      s.position = pos_;
      s.mass = star_m_;
      return s;  // stationary reference: its pair PE is billed to the planets
    }
    int i = body - 1;
    s.position = pos_ + Vec3(q[2 * i], q[2 * i + 1], 0);
    s.lin_vel = Vec3(v[2 * i], v[2 * i + 1], 0);
    s.lin_acc = Vec3(vdot[2 * i], vdot[2 * i + 1], 0);
    s.mass = masses_[i];
    double r = std::hypot(q[2 * i], q[2 * i + 1]);
    // full star pair plus half of each planet-planet pair; body PEs then sum
    // to the true system potential
    double pe = -G * star_m_ * masses_[i] / r;
    for (std::size_t j = 0; j < masses_.size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      double dij = std::hypot(q[2 * i] - q[2 * j], q[2 * i + 1] - q[2 * j + 1]);
      pe -= 0.5 * G * masses_[i] * masses_[j] / dij;
    }
    s.potential_energy = pe;
    return s;
  }

 private:
  Vec3 pos_;
  double star_m_;
  std::vector<double> masses_, radii_, factors_;
};

// ---------------------------------------------------------------------------
// rocket_entity: radial ascent from a planet surface with mass loss and
// inverse-square gravity. q = (r), distance from planet center.
// ---------------------------------------------------------------------------
class RocketBlock final : public EntityBlock {
 public:
  RocketBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec&)
      : EntityBlock(spec.name, spec.kind, 1),
        pos_(spec.position),
        m_dry_(spec.params.at("dry_mass").number()),
        m0_(spec.params.at("initial_mass").number()),
        burn_rate_(spec.params.at("burn_rate").number()),
        u_e_(spec.params.at("exhaust_speed").number()),
        planet_m_(spec.params.at("planet_mass").number()),
        planet_r_(spec.params.at("planet_radius").number()) {}

  double mass_at(double t) const {
    return std::max(m0_ - burn_rate_ * t, m_dry_);
  }
  double burn_time() const { return (m0_ - m_dry_) / burn_rate_; }

  bool mass_is_constant() const override { return m0_ == m_dry_; }

  void initial_state(VecRef q, VecRef v) const override {
    q[0] = planet_r_;
    v[0] = 0.0;
  }

  void mass_matrix(double t, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M(0, 0) = mass_at(t);
  }

  void force(double t, CVecRef q, CVecRef v, int, VecRef f) const override {
    double m = mass_at(t);
    double thrust = t < burn_time() ? burn_rate_ * u_e_ : 0.0;
    double r = std::max(q[0], 0.1 * planet_r_);
    f[0] = thrust - kGravitationalConstant * planet_m_ * m / (r * r);
    f[0] += pad_force(q[0], v[0]);
  }

  std::vector<std::string> body_names() const override {
    return {"planet", "rocket"};
  }

  BodyState body_state(int body, double t, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body == 0) {
      s.position = pos_ - Vec3(0, 0, planet_r_);
      s.mass = planet_m_;
      return s;
    }
    s.position = pos_ + Vec3(0, 0, q[0] - planet_r_);
    s.lin_vel = Vec3(0, 0, v[0]);
    s.lin_acc = Vec3(0, 0, vdot[0]);
    s.mass = mass_at(t);
    s.potential_energy =
        -kGravitationalConstant * planet_m_ * s.mass / std::max(q[0], 1e-6);
    return s;
  }

  std::vector<ContactModel> contacts() const override {
    return {{"rocket|pad"}};
  }

  void contact_state(double, CVecRef q, CVecRef v, CVecRef, int,
                     std::vector<ContactState>& out) const override {
    out[0].normal_force = pad_force(q[0], v[0]);
  }

 private:
  double pad_force(double r, double vr) const {
    if (r >= planet_r_) return 0.0;
    double k = 1.0e4 * m0_;
    double c = 2.0 * std::sqrt(k * m0_);
    return std::max(0.0, k * (planet_r_ - r) - c * vr);
  }

  Vec3 pos_;
  double m_dry_, m0_, burn_rate_, u_e_, planet_m_, planet_r_;
};

// ---------------------------------------------------------------------------
// rotation_entity: rigid compound of shapes swinging about a fixed pivot in
// the x-z plane. q = (theta), measured from the downward vertical.
// ---------------------------------------------------------------------------
class PendulumBlock final : public EntityBlock {
 public:
  PendulumBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 1),
        g_(scene.g()),
        pos_(spec.position),
        types_(split_tokens(spec.params.at("shape_types").str())),
        masses_(spec.params.at("shape_masses").list()),
        sizes_(spec.params.at("shape_sizes").list()),
        offsets_(spec.params.at("shape_offsets").list()),
        theta0_(spec.params.at("initial_angle").number()),
        omega0_(spec.params.at("initial_angular_velocity").number()) {
    inertia_pivot_ = 0.0;
    weighted_d_ = 0.0;
    for (std::size_t i = 0; i < types_.size(); ++i) {
      inertia_pivot_ +=
          swing_inertia_com(i) + masses_[i] * offsets_[i] * offsets_[i];
      weighted_d_ += masses_[i] * offsets_[i];
    }
  }

  double pivot_inertia() const { return inertia_pivot_; }
  double gravity_lever() const { return weighted_d_; }

  void initial_state(VecRef q, VecRef v) const override {
    q[0] = theta0_;
    v[0] = omega0_;
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M(0, 0) = inertia_pivot_;
  }

  void force(double, CVecRef q, CVecRef, int, VecRef f) const override {
    f[0] = -g_ * weighted_d_ * std::sin(q[0]);
  }

  std::vector<std::string> body_names() const override {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < types_.size(); ++i) {
      names.push_back(types_[i] + "_" + std::to_string(i));
    }
    return names;
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    double th = q[0], w = v[0], a = vdot[0];
    Vec3 radial(std::sin(th), 0, -std::cos(th));      // pivot -> shape
    Vec3 tangent(std::cos(th), 0, std::sin(th));
    double d = offsets_[body];
    s.position = pos_ + radial * d;
    s.lin_vel = tangent * (d * w);
    s.lin_acc = tangent * (d * a) - radial * (d * w * w);
    s.ang_vel = Vec3(0, w, 0);
    s.ang_acc = Vec3(0, a, 0);
    s.mass = masses_[body];
    s.inertia = world_inertia(body, th);
    s.potential_energy = s.mass * g_ * s.position.z();
    if (types_[body] == "hemisphere") {
      s.com_offset = radial * (3.0 * sizes_[body] / 8.0);
    }
    return s;
  }

  std::vector<GlueJoint> glue_joints() const override {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(1, 1);
    return {{name() + "/pivot", "pivot", rows}};
  }

 private:
  // inertia about the swing axis (y) through the shape's COM
  double swing_inertia_com(std::size_t i) const {
    double m = masses_[i], r = sizes_[i];
    const std::string& t = types_[i];
    if (t == "sphere") return 0.4 * m * r * r;
    if (t == "cylinder") return 0.5 * m * r * r;  // axis parallel to pivot
    if (t == "disc") return 0.5 * m * r * r;      // disc in the swing plane
    if (t == "hemisphere") return (83.0 / 320.0) * m * r * r;
    // bar along the radial direction; exact cuboid with w = h = 0.05
    double w = 0.05;
    return m * (r * r + w * w) / 12.0;
  }

  Mat3 world_inertia(std::size_t i, double th) const {
    double m = masses_[i], r = sizes_[i];
    const std::string& t = types_[i];
    Vec3 diag;
    if (t == "sphere") {
      diag.setConstant(0.4 * m * r * r);
    } else if (t == "cylinder") {
      double h = r;
      diag = Vec3(m * (3 * r * r + h * h) / 12.0, 0.5 * m * r * r,
                  m * (3 * r * r + h * h) / 12.0);
    } else if (t == "disc") {
      diag = Vec3(0.25 * m * r * r, 0.5 * m * r * r, 0.25 * m * r * r);
    } else if (t == "hemisphere") {
      diag = Vec3((83.0 / 320.0) * m * r * r, (83.0 / 320.0) * m * r * r,
                  0.4 * m * r * r);
    } else {
      double w = 0.05;
      diag = Vec3(m * (w * w + w * w) / 12.0, m * (r * r + w * w) / 12.0,
                  m * (r * r + w * w) / 12.0);
    }
    Eigen::AngleAxisd R(th, Vec3::UnitY());
    return R.toRotationMatrix() * diag.asDiagonal() *
           R.toRotationMatrix().transpose();
  }

  double g_;
  Vec3 pos_;
  std::vector<std::string> types_;
  std::vector<double> masses_, sizes_, offsets_;
  double theta0_, omega0_;
  double inertia_pivot_, weighted_d_;
};

// ---------------------------------------------------------------------------
// rolling_entity: a shape rolling without slipping down an incline.
// q = (s), distance travelled down the face.
// ---------------------------------------------------------------------------
class RollingBlock final : public EntityBlock {
 public:
  RollingBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 1),
        g_(scene.g()),
        pos_(spec.position),
        type_(spec.params.at("shape_type").str()),
        m_(spec.params.at("mass").number()),
        r_(spec.params.at("radius").number()),
        ri_(spec.params.count("inner_radius")
                ? spec.params.at("inner_radius").number()
                : 0.0),
        alpha_(spec.params.at("incline_angle").number()),
        length_(spec.params.at("incline_length").number()) {}

  // shape factor c = I / (m r^2)
  double shape_factor() const {
    if (type_ == "sphere") return 0.4;
    if (type_ == "cylinder" || type_ == "disc") return 0.5;
    if (type_ == "hollow_cylinder") {
      return 0.5 * (1.0 + (ri_ / r_) * (ri_ / r_));
    }
    // thick spherical shell
    double R5 = std::pow(r_, 5) - std::pow(ri_, 5);
    double R3 = std::pow(r_, 3) - std::pow(ri_, 3);
    return 0.4 * (R5 / R3) / (r_ * r_);
  }

  void initial_state(VecRef q, VecRef v) const override {
    q.setZero();
    v.setZero();
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M(0, 0) = m_ * (1.0 + shape_factor());
  }

  void force(double, CVecRef q, CVecRef v, int mode, VecRef f) const override {
    f[0] = m_ * g_ * std::sin(alpha_);
    if (mode & 1) add_pin(f, q, v, 0, length_ - 0.05, m_);
  }

  std::vector<std::string> body_names() const override {
    return {"plane", "roller"};
  }

  BodyState body_state(int body, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    if (body == 0) {
      s.position = pos_;
      s.mass = 0.0;
      return s;
    }
    Vec3 down(std::cos(alpha_), 0, -std::sin(alpha_));
    Vec3 normal(std::sin(alpha_), 0, std::cos(alpha_));
    double h0 = length_ * std::sin(alpha_);  // start at the top of the face
    s.position = pos_ + Vec3(0, 0, h0) + down * q[0] + normal * r_;
    s.lin_vel = down * v[0];
    s.lin_acc = down * vdot[0];
    s.ang_vel = Vec3(0, v[0] / r_, 0);
    s.ang_acc = Vec3(0, vdot[0] / r_, 0);
    s.mass = m_;
    s.inertia = Mat3::Identity() * (shape_factor() * m_ * r_ * r_);
    s.potential_energy = m_ * g_ * s.position.z();
    return s;
  }

  std::vector<ContactModel> contacts() const override {
    return {{"roller|plane"}};
  }

  void contact_state(double, CVecRef, CVecRef, CVecRef vdot, int,
                     std::vector<ContactState>& out) const override {
    out[0].normal_force = m_ * g_ * std::cos(alpha_);
    // static friction supplies the angular acceleration
    out[0].friction_force = -shape_factor() * m_ * vdot[0];
  }

  std::vector<GlueJoint> glue_joints() const override {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(1, 1);
    return {{name() + "/roller|plane", "contact", rows}};
  }

  int event_count() const override { return 1; }

  double event_value(int, double, CVecRef q, CVecRef, int mode) const override {
    if (mode & 1) return 1.0;
    return length_ - 0.05 - q[0];
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
  std::string type_;
  double m_, r_, ri_, alpha_, length_;
};

// ---------------------------------------------------------------------------
// em_entity: a point particle in uniform static E and B fields, optionally
// under gravity (a zero-charge particle is a projectile). q = (x, y, z).
// ---------------------------------------------------------------------------
class ChargedParticleBlock final : public EntityBlock {
 public:
  ChargedParticleBlock(const dsl::EntitySpec& spec, const dsl::SceneSpec& scene)
      : EntityBlock(spec.name, spec.kind, 3),
        gvec_(scene.gravity),
        pos_(spec.position),
        m_(spec.params.at("mass").number()),
        q_(spec.params.at("charge").number()) {
    auto vec = [&](const char* key) {
      const auto& l = spec.params.at(key).list();
      return Vec3(l[0], l[1], l[2]);
    };
    x0_ = vec("initial_position");
    v0_ = vec("initial_velocity");
    E_ = vec("electric_field");
    B_ = vec("magnetic_field");
    const std::string& grav = spec.params.at("gravity").str();
    gravity_on_ = grav == "on" || (grav == "auto" && q_ == 0.0);
  }

  void initial_state(VecRef q, VecRef v) const override {
    q = x0_;
    v = v0_;
  }

  void mass_matrix(double, CVecRef, Eigen::Ref<Eigen::MatrixXd> M) const override {
    M.setZero();
    M.diagonal().setConstant(m_);
  }

  void force(double, CVecRef, CVecRef v, int, VecRef f) const override {
    Vec3 vel(v[0], v[1], v[2]);
    Vec3 F = q_ * (E_ + vel.cross(B_));
    if (gravity_on_) F += m_ * gvec_;
    f = F;
  }

  std::vector<std::string> body_names() const override { return {"particle"}; }

  BodyState body_state(int, double, CVecRef q, CVecRef v, CVecRef vdot,
                       int) const override {
    BodyState s;
    s.position = pos_ + Vec3(q[0], q[1], q[2]);
    s.lin_vel = Vec3(v[0], v[1], v[2]);
    s.lin_acc = Vec3(vdot[0], vdot[1], vdot[2]);
    s.mass = m_;
    s.potential_energy =
        gravity_on_ ? -m_ * gvec_.dot(Vec3(q[0], q[1], q[2])) : 0.0;
    s.em_potential_energy = -q_ * E_.dot(Vec3(q[0], q[1], q[2]));
    return s;
  }

 private:
  Vec3 gvec_, pos_;
  double m_, q_;
  Vec3 x0_, v0_, E_, B_;
  bool gravity_on_;
};

}  // namespace

std::unique_ptr<EntityBlock> build_field_block(const dsl::EntitySpec& spec,
                                               const dsl::SceneSpec& scene) {
  switch (spec.kind) {
    case dsl::EntityKind::kTwoDCollisionPlane:
      return std::make_unique<PlanarCollisionBlock>(spec, scene);
    case dsl::EntityKind::kComplexCollisionPlane:
      return std::make_unique<LinearCollisionBlock>(spec, scene);
    case dsl::EntityKind::kSolarSystem:
      return std::make_unique<SolarSystemBlock>(spec, scene);
    case dsl::EntityKind::kRocketEntity:
      return std::make_unique<RocketBlock>(spec, scene);
    case dsl::EntityKind::kRotationEntity:
      return std::make_unique<PendulumBlock>(spec, scene);
    case dsl::EntityKind::kRollingEntity:
      return std::make_unique<RollingBlock>(spec, scene);
    case dsl::EntityKind::kEmEntity:
      return std::make_unique<ChargedParticleBlock>(spec, scene);
    default:
      return nullptr;
  }
}

std::unique_ptr<EntityBlock> build_entity_block(const dsl::EntitySpec& spec,
                                                const dsl::SceneSpec& scene) {
  if (auto b = build_mech_block(spec, scene)) return b;
  if (auto b = build_field_block(spec, scene)) return b;
  throw SimulationError("no dynamics template for entity kind " +
                        std::string(dsl::to_string(spec.kind)));
}

}  // namespace forge::sim
