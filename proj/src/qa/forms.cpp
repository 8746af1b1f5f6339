#include "forge/qa/qa.hpp"

#include <cmath>
#include <numbers>

// Closed-form registry for symbolic questions. Each form carries the
// expression, its symbol bindings into scene parameters, and a measurement
// routine so make_symbolic can validate the expression against the
// simulator. Scenes outside the registry simply yield no forms.

namespace forge::qa {

namespace {

using dsl::EntityKind;
using dsl::EntitySpec;
using dsl::ParamPath;
using dsl::SceneSpec;

using Binding = SymbolicForm::Binding;

Binding bind(std::string sym, std::string desc, std::string unit,
             ParamPath path, double value) {
  return {std::move(sym), std::move(desc), std::move(unit), std::move(path),
          value};
}

Binding bind_free(std::string sym, std::string desc, std::string unit,
                  double value) {
  return {std::move(sym), std::move(desc), std::move(unit), std::nullopt,
          value};
}

double pnum(const EntitySpec& e, const char* key) {
  return e.params.at(key).number();
}

// Period of the x-displacement of `body` by mean-crossing upstrokes.
double measured_period(const sim::Trace& tr, const std::string& body,
                       int axis) {
  const auto* b = tr.find_body(body);
  if (!b) throw Error("missing body " + body);
  double mean = 0;
  for (const auto& p : b->displacement) mean += p[axis];
  mean /= static_cast<double>(b->displacement.size());
  std::vector<double> crossings;
  for (std::size_t i = 1; i < b->displacement.size(); ++i) {
    double a = b->displacement[i - 1][axis] - mean;
    double c = b->displacement[i][axis] - mean;
    if (a <= 0 && c > 0) {
      crossings.push_back(tr.times[i - 1] +
                          (tr.times[i] - tr.times[i - 1]) * (-a / (c - a)));
    }
  }
  if (crossings.size() < 2) throw Error("too few cycles to measure a period");
  return (crossings.back() - crossings.front()) /
         static_cast<double>(crossings.size() - 1);
}

Expr::Ptr sym(const char* s) { return Expr::symbol(s); }

// ---- per-kind form builders -----------------------------------------------

void em_forms(const SceneSpec& scene, const EntitySpec& e,
              std::vector<SymbolicForm>& out) {
  double q = pnum(e, "charge");
  const auto& v0 = e.params.at("initial_velocity").list();
  const std::string& grav = e.params.at("gravity").str();
  bool g_on = grav == "on" || (grav == "auto" && q == 0.0);
  if (q != 0.0 || !g_on) return;
  double g = scene.g();
  std::string body = e.name + "/particle";

  if (v0[0] == 0 && v0[1] == 0 && v0[2] == 0) {
    // free fall from rest: speed after time t
    SymbolicForm f;
    f.label = "speed_after_t";
    f.question_clause =
        "What is the speed of the particle after a time t of free fall?";
    f.expr = Expr::mul(sym("g"), sym("t"));
    f.unit = "m/s";
    f.body = body;
    f.bindings = {
        bind_free("g", "gravitational acceleration", "m/s^2", g),
        bind_free("t", "elapsed time", "s", 3.0),
    };
    f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                       const std::map<std::string, double>& vals) {
      return sim::probe(tr, body, "velocity.magnitude", vals.at("t"));
    };
    out.push_back(std::move(f));
  }

  if (v0[0] == 0 && v0[1] == 0 && v0[2] > 0.5 && v0[2] / g < 6.0) {
    // vertical throw: maximum height gained above the launch point
    SymbolicForm f;
    f.label = "max_height_above_launch";
    f.question_clause =
        "What maximum height above the launch point does the particle "
        "reach?";
    f.expr = Expr::div(Expr::pow(sym("v0"), Expr::number(2)),
                       Expr::mul(Expr::number(2), sym("g")));
    f.unit = "m";
    f.body = body;
    f.bindings = {
        bind("v0", "initial upward speed", "m/s",
             ParamPath{e.name, "initial_velocity", 2}, v0[2]),
        bind_free("g", "gravitational acceleration", "m/s^2", g),
    };
    f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                       const std::map<std::string, double>&) {
      const auto* b = tr.find_body(body);
      double z0 = b->displacement.front().z(), zmax = z0;
      for (const auto& p : b->displacement) zmax = std::max(zmax, p.z());
      return zmax - z0;
    };
    out.push_back(std::move(f));
  }
}

void atwood_form(const SceneSpec& scene, const EntitySpec& e,
                 std::vector<SymbolicForm>& out) {
  const auto& ms = e.params.at("mass_values").list();
  if (std::abs(ms[0] - ms[1]) < 0.05 * (ms[0] + ms[1])) return;
  SymbolicForm f;
  f.label = "atwood_acceleration";
  f.question_clause =
      "What is the downward acceleration of the first suspended block "
      "('" + e.name + "/mass_a')?";
  f.expr = Expr::div(
      Expr::mul(Expr::sub(sym("m1"), sym("m2")), sym("g")),
      Expr::add(sym("m1"), sym("m2")));
  f.unit = "m/s^2";
  f.body = e.name + "/mass_a";
  f.bindings = {
      bind("m1", "mass of the first block", "kg",
           ParamPath{e.name, "mass_values", 0}, ms[0]),
      bind("m2", "mass of the second block", "kg",
           ParamPath{e.name, "mass_values", 1}, ms[1]),
      bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
  };
  std::string body = f.body;
  f.sim_horizon = 0.2;
  f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                     const std::map<std::string, double>&) {
    return -sim::probe(tr, body, "acceleration.z", 0.05);
  };
  out.push_back(std::move(f));
}

void incline_form(const SceneSpec& scene, const EntitySpec& e,
                  std::vector<SymbolicForm>& out) {
  double alpha = pnum(e, "incline_angle");
  double mu = pnum(e, "friction_coefficient");
  if (pnum(e, "initial_velocity") != 0.0) return;
  if (pnum(e, "face_length") < 10.0) return;
  if (alpha > 1.1) return;  // headroom for perturbation draws
  if (mu > 0 && std::tan(alpha) < mu + 0.1) return;  // must actually slide
  SymbolicForm f;
  f.label = "incline_acceleration";
  f.question_clause =
      "What is the magnitude of the block's acceleration along the face?";
  if (mu == 0.0) {
    f.expr = Expr::mul(sym("g"), Expr::call("sin", sym("alpha")));
    f.bindings = {
        bind("alpha", "incline angle", "rad",
             ParamPath{e.name, "incline_angle", -1}, alpha),
        bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
    };
  } else {
    f.expr = Expr::mul(
        sym("g"),
        Expr::sub(Expr::call("sin", sym("alpha")),
                  Expr::mul(sym("mu"), Expr::call("cos", sym("alpha")))));
    f.bindings = {
        bind("alpha", "incline angle", "rad",
             ParamPath{e.name, "incline_angle", -1}, alpha),
        bind("mu", "coefficient of friction", "",
             ParamPath{e.name, "friction_coefficient", -1}, mu),
        bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
    };
  }
  f.unit = "m/s^2";
  f.body = e.name + "/block";
  f.sim_horizon = 1.0;
  std::string body = f.body;
  f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                     const std::map<std::string, double>&) {
    return sim::probe(tr, body, "acceleration.magnitude", 0.6);
  };
  out.push_back(std::move(f));
}

void rolling_form(const SceneSpec& scene, const EntitySpec& e,
                  std::vector<SymbolicForm>& out) {
  const std::string& shape = e.params.at("shape_type").str();
  double c;
  if (shape == "sphere") {
    c = 0.4;
  } else if (shape == "cylinder" || shape == "disc") {
    c = 0.5;
  } else {
    return;  // hollow factors depend on both radii; not registered
  }
  double alpha = pnum(e, "incline_angle");
  if (alpha > 1.1) return;
  SymbolicForm f;
  f.label = "rolling_acceleration";
  f.question_clause =
      "What is the magnitude of the " + shape +
      "'s acceleration down the incline while it rolls without slipping?";
  f.expr = Expr::div(Expr::mul(sym("g"), Expr::call("sin", sym("alpha"))),
                     Expr::add(Expr::number(1), Expr::number(c)));
  f.unit = "m/s^2";
  f.body = e.name + "/roller";
  f.bindings = {
      bind("alpha", "incline angle", "rad",
           ParamPath{e.name, "incline_angle", -1}, alpha),
      bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
  };
  f.sim_horizon = 0.5;
  std::string body = f.body;
  f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                     const std::map<std::string, double>&) {
    return sim::probe(tr, body, "acceleration.magnitude", 0.2);
  };
  out.push_back(std::move(f));
}

void orbit_form(const SceneSpec& scene, const EntitySpec& e,
                std::vector<SymbolicForm>& out) {
  const auto& ms = e.params.at("planet_masses").list();
  const auto& factors = e.params.at("speed_factors").list();
  if (ms.size() != 1 || factors[0] != 1.0) return;
  double a = e.params.at("orbit_radii").list()[0];
  double star = pnum(e, "star_mass");
  SymbolicForm f;
  f.label = "orbital_period";
  f.question_clause =
      "What is the orbital period of the planet on its circular orbit?";
  f.expr = Expr::mul(
      Expr::mul(Expr::number(2), sym("pi")),
      Expr::sqrt(Expr::div(Expr::pow(sym("a"), Expr::number(3)),
                           Expr::mul(sym("G"), sym("M")))));
  f.unit = "s";
  f.body = e.name + "/planet_0";
  f.bindings = {
      bind("a", "orbital radius", "m", ParamPath{e.name, "orbit_radii", 0}, a),
      bind("M", "mass of the star", "kg", ParamPath{e.name, "star_mass", -1},
           star),
      bind_free("G", "gravitational constant", "m^3/(kg s^2)",
                kGravitationalConstant),
  };
  double t_est = 2.0 * std::numbers::pi *
                 std::sqrt(a * a * a / (kGravitationalConstant * star));
  f.sim_dt = 1e-5 * t_est;
  f.sim_horizon = 2e-3 * t_est;
  std::string planet = f.body, star_body = e.name + "/star";
  f.measure = [planet, star_body](const SceneSpec&, const sim::Trace& tr,
                                  const std::map<std::string, double>&) {
    // circular orbit: T = 2 pi r / v, measured instantaneously
    const auto* p = tr.find_body(planet);
    const auto* s = tr.find_body(star_body);
    double r = (p->displacement.front() - s->displacement.front()).norm();
    double v = p->velocity.front().head<3>().norm();
    return 2.0 * std::numbers::pi * r / v;
  };
  out.push_back(std::move(f));
}

void rocket_form(const SceneSpec&, const EntitySpec& e,
                 std::vector<SymbolicForm>& out) {
  double m0 = pnum(e, "initial_mass"), mdry = pnum(e, "dry_mass");
  double mu = pnum(e, "burn_rate"), ve = pnum(e, "exhaust_speed");
  double mp = pnum(e, "planet_mass"), rp = pnum(e, "planet_radius");
  if (m0 <= mdry * 1.05) return;
  double burn_t = (m0 - mdry) / mu;
  double dv = ve * std::log(m0 / mdry);
  double g0 = kGravitationalConstant * mp / (rp * rp);
  if (g0 * burn_t > 2e-3 * dv) return;  // gravity loss must be negligible
  SymbolicForm f;
  f.label = "burnout_speed";
  f.question_clause =
      "Gravity is negligible for this rocket. What is its speed at burnout?";
  f.expr = Expr::mul(sym("u"),
                     Expr::call("ln", Expr::div(sym("m0"), sym("m_dry"))));
  f.unit = "m/s";
  f.body = e.name + "/rocket";
  f.bindings = {
      bind("u", "exhaust speed", "m/s", ParamPath{e.name, "exhaust_speed", -1},
           ve),
      bind("m0", "initial total mass", "kg",
           ParamPath{e.name, "initial_mass", -1}, m0),
      bind("m_dry", "dry mass", "kg", ParamPath{e.name, "dry_mass", -1}, mdry),
  };
  f.sim_horizon = burn_t * 1.3 + 1.0;
  std::string body = f.body;
  std::string entity = e.name;
  f.measure = [body, entity](const SceneSpec& sc, const sim::Trace& tr,
                             const std::map<std::string, double>&) {
    const EntitySpec* re = sc.find_entity(entity);
    double bt = (pnum(*re, "initial_mass") - pnum(*re, "dry_mass")) /
                pnum(*re, "burn_rate");
    return sim::probe(tr, body, "velocity.z", bt);
  };
  out.push_back(std::move(f));
}

void pendulum_form(const SceneSpec& scene, const EntitySpec& e,
                   std::vector<SymbolicForm>& out) {
  auto types = e.params.at("shape_types").str();
  if (types != "bar") return;
  double l = e.params.at("shape_sizes").list()[0];
  double off = e.params.at("shape_offsets").list()[0];
  double th0 = pnum(e, "initial_angle");
  if (std::abs(off - l / 2) > 1e-9) return;  // pivot must sit at the bar end
  if (std::abs(th0) > 0.2 || l < 0.3) return;
  if (pnum(e, "initial_angular_velocity") != 0.0) return;
  SymbolicForm f;
  f.label = "bar_pendulum_period";
  f.question_clause =
      "What is the small-angle period of the bar swinging about its end?";
  f.expr = Expr::mul(
      Expr::mul(Expr::number(2), sym("pi")),
      Expr::sqrt(Expr::div(Expr::mul(Expr::number(2), sym("l")),
                           Expr::mul(Expr::number(3), sym("g")))));
  f.unit = "s";
  f.body = e.name + "/bar_0";
  f.bindings = {
      bind("l", "length of the bar", "m", ParamPath{e.name, "shape_sizes", 0},
           l),
      bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
  };
  double t_est = 2.0 * std::numbers::pi * std::sqrt(2.0 * l * 1.3 /
                                                    (3.0 * scene.g()));
  f.sim_horizon = 3.2 * t_est;
  std::string body = f.body;
  f.measure = [body](const SceneSpec& sc, const sim::Trace& tr,
                     const std::map<std::string, double>&) {
    // perturbing l moves the COM offset with it
    (void)sc;
    return measured_period(tr, body, 0);
  };
  out.push_back(std::move(f));
}

void box_form(const SceneSpec& scene, const EntitySpec& e,
              std::vector<SymbolicForm>& out) {
  if (pnum(e, "friction_coefficient") != 0.0) return;
  SymbolicForm f;
  f.label = "hanging_block_acceleration";
  f.question_clause =
      "What is the magnitude of the hanging block's downward acceleration?";
  // m2 g / (m1 + m2 - m1^2 / (M + m1 + m2))
  auto tot = Expr::add(Expr::add(sym("M"), sym("m1")), sym("m2"));
  f.expr = Expr::div(
      Expr::mul(sym("m2"), sym("g")),
      Expr::sub(Expr::add(sym("m1"), sym("m2")),
                Expr::div(Expr::pow(sym("m1"), Expr::number(2)), tot)));
  f.unit = "m/s^2";
  f.body = e.name + "/side_block";
  f.bindings = {
      bind("M", "mass of the large block", "kg",
           ParamPath{e.name, "box_mass", -1}, pnum(e, "box_mass")),
      bind("m1", "mass of the top block", "kg",
           ParamPath{e.name, "top_mass", -1}, pnum(e, "top_mass")),
      bind("m2", "mass of the hanging block", "kg",
           ParamPath{e.name, "side_mass", -1}, pnum(e, "side_mass")),
      bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
  };
  f.sim_horizon = 0.2;
  std::string body = f.body;
  f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                     const std::map<std::string, double>&) {
    return -sim::probe(tr, body, "acceleration.z", 0.05);
  };
  out.push_back(std::move(f));
}

void wedge_form(const SceneSpec& scene, const EntitySpec& e,
                std::vector<SymbolicForm>& out) {
  if (pnum(e, "friction_coefficient") != 0.0) return;
  if (!e.params.count("left_mass") || !e.params.count("right_mass")) return;
  double al = pnum(e, "left_angle"), ar = pnum(e, "right_angle");
  if (al > 1.1 || ar > 1.1) return;
  double ml = pnum(e, "left_mass"), mr = pnum(e, "right_mass");
  double sdd_est =
      (pnum(e, "wedge_mass") + ml + mr) *
      (mr * std::sin(ar) - ml * std::sin(al)) * scene.g() /
      ((pnum(e, "wedge_mass") + ml + mr) * (ml + mr) -
       std::pow(ml * std::cos(al) + mr * std::cos(ar), 2));
  if (std::abs(sdd_est) < 0.2) return;  // nearly balanced; poor measurement
  SymbolicForm f;
  f.label = "wedge_block_relative_acceleration";
  f.question_clause =
      "What is the acceleration of the right block along the face, relative "
      "to the wedge (positive down the face)?";
  auto tot = Expr::add(Expr::add(sym("M"), sym("mL")), sym("mR"));
  auto drive = Expr::mul(
      Expr::sub(Expr::mul(sym("mR"), Expr::call("sin", sym("aR"))),
                Expr::mul(sym("mL"), Expr::call("sin", sym("aL")))),
      sym("g"));
  auto coupling = Expr::add(Expr::mul(sym("mL"), Expr::call("cos", sym("aL"))),
                            Expr::mul(sym("mR"), Expr::call("cos", sym("aR"))));
  f.expr = Expr::div(Expr::mul(tot, drive),
                     Expr::sub(Expr::mul(tot, Expr::add(sym("mL"), sym("mR"))),
                               Expr::pow(coupling, Expr::number(2))));
  f.unit = "m/s^2";
  f.body = e.name + "/block_right";
  f.bindings = {
      bind("M", "mass of the wedge", "kg", ParamPath{e.name, "wedge_mass", -1},
           pnum(e, "wedge_mass")),
      bind("mL", "mass of the left block", "kg",
           ParamPath{e.name, "left_mass", -1}, ml),
      bind("mR", "mass of the right block", "kg",
           ParamPath{e.name, "right_mass", -1}, mr),
      bind("aL", "left face angle", "rad", ParamPath{e.name, "left_angle", -1},
           al),
      bind("aR", "right face angle", "rad",
           ParamPath{e.name, "right_angle", -1}, ar),
      bind_free("g", "gravitational acceleration", "m/s^2", scene.g()),
  };
  f.sim_horizon = 0.2;
  std::string entity = e.name;
  f.measure = [entity](const SceneSpec& sc, const sim::Trace& tr,
                       const std::map<std::string, double>&) {
    const EntitySpec* we = sc.find_entity(entity);
    double ar2 = pnum(*we, "right_angle");
    Vec3 u(std::cos(ar2), 0, -std::sin(ar2));
    const auto* blk = tr.find_body(entity + "/block_right");
    const auto* wdg = tr.find_body(entity + "/wedge");
    std::size_t i = std::min<std::size_t>(50, blk->acceleration.size() - 1);
    Vec3 rel = blk->acceleration[i].head<3>() - wdg->acceleration[i].head<3>();
    return rel.dot(u);
  };
  out.push_back(std::move(f));
}

void collision_form(const SceneSpec&, const EntitySpec& e,
                    std::vector<SymbolicForm>& out) {
  auto types_str = e.params.at("object_types").str();
  if (types_str != "block block" && types_str != "block sphere" &&
      types_str != "sphere block" && types_str != "sphere sphere") {
    return;
  }
  const auto& ms = e.params.at("masses").list();
  const auto& vel = e.params.at("initial_velocities").list();
  const auto& pos = e.params.at("initial_positions").list();
  double approach = vel[0] - vel[1];
  if (approach < 0.5) return;  // they never meet (or too slowly)
  double gap = pos[1] - pos[0];
  SymbolicForm f;
  f.label = "post_collision_velocity";
  f.question_clause =
      "After the two objects collide once, what is the velocity of the left "
      "object (positive along +x)?";
  auto msum = Expr::add(sym("m1"), sym("m2"));
  f.expr = Expr::div(
      Expr::add(Expr::mul(Expr::sub(sym("m1"), Expr::mul(sym("e"), sym("m2"))),
                          sym("u1")),
                Expr::mul(Expr::mul(Expr::add(Expr::number(1), sym("e")),
                                    sym("m2")),
                          sym("u2"))),
      msum);
  f.unit = "m/s";
  std::string first = types_str.substr(0, types_str.find(' ')) + "_0";
  f.body = e.name + "/" + first;
  f.bindings = {
      bind("m1", "mass of the left object", "kg", ParamPath{e.name, "masses", 0},
           ms[0]),
      bind("m2", "mass of the right object", "kg",
           ParamPath{e.name, "masses", 1}, ms[1]),
      bind("u1", "initial velocity of the left object", "m/s",
           ParamPath{e.name, "initial_velocities", 0}, vel[0]),
      bind("u2", "initial velocity of the right object", "m/s",
           ParamPath{e.name, "initial_velocities", 1}, vel[1]),
      bind("e", "coefficient of restitution", "",
           ParamPath{e.name, "restitution", -1},
           e.params.at("restitution").number()),
  };
  f.sim_horizon = 2.0 * gap / (0.5 * approach) + 1.0;
  std::string body = f.body;
  f.measure = [body](const SceneSpec&, const sim::Trace& tr,
                     const std::map<std::string, double>&) {
    return sim::probe(tr, body, "velocity.x", tr.duration());
  };
  out.push_back(std::move(f));
}

}  // namespace

std::vector<SymbolicForm> symbolic_forms(const dsl::SceneSpec& scene) {
  std::vector<SymbolicForm> out;
  if (scene.entities.size() != 1 || !scene.connections.empty()) return out;
  const EntitySpec& e = scene.entities.front();
  switch (e.kind) {
    case EntityKind::kEmEntity:
      em_forms(scene, e, out);
      break;
    case EntityKind::kMassWithMovablePulley:
      atwood_form(scene, e, out);
      break;
    case EntityKind::kTwoSideMassPlane:
      incline_form(scene, e, out);
      break;
    case EntityKind::kRollingEntity:
      rolling_form(scene, e, out);
      break;
    case EntityKind::kSolarSystem:
      orbit_form(scene, e, out);
      break;
    case EntityKind::kRocketEntity:
      rocket_form(scene, e, out);
      break;
    case EntityKind::kRotationEntity:
      pendulum_form(scene, e, out);
      break;
    case EntityKind::kMassBoxPlane:
      box_form(scene, e, out);
      break;
    case EntityKind::kMassPrismPlane:
      wedge_form(scene, e, out);
      break;
    case EntityKind::kComplexCollisionPlane:
      collision_form(scene, e, out);
      break;
    default:
      break;
  }
  return out;
}

}  // namespace forge::qa
