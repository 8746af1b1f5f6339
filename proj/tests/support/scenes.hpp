#pragma once

// Scene-document builders shared by the unit and acceptance suites.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "forge/dsl/parse.hpp"
#include "forge/sim/model.hpp"

namespace scenes {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string free_fall(double mass = 1.0) {
  return R"(scene:
  name: "free fall"
  entities:
    - name: "e1"
      type: "EmEntity"
      parameters:
        mass: )" +
         num(mass) + "\n";
}

inline std::string projectile(double vx, double vz, double mass = 1.0) {
  return R"(scene:
  name: "projectile"
  entities:
    - name: "e1"
      type: "EmEntity"
      parameters:
        mass: )" +
         num(mass) + R"(
        initial_velocity: [)" +
         num(vx) + ", 0, " + num(vz) + "]\n";
}

inline std::string atwood(double m1, double m2) {
  return R"(scene:
  name: "atwood"
  entities:
    - name: "e1"
      type: "MassWithMovablePulley"
      parameters:
        mass_values: [)" +
         num(m1) + ", " + num(m2) + "]\n";
}

inline std::string atwood_two_entities(double m1, double m2) {
  return R"(scene:
  name: "atwood pair"
  entities:
    - name: "entity1"
      type: "MassWithFixedPulley"
      position: [0, 0, 2]
      parameters:
        mass_type: "Mass"
        mass_values: [)" +
         num(m1) + R"(]
    - name: "entity2"
      type: "MassWithFixedPulley"
      position: [2, 0, 2]
      parameters:
        mass_type: "Mass"
        mass_values: [)" +
         num(m2) + R"(]
  connections:
    - tendon:
      - entity: "entity1"
        direction: "inner_to_outer"
      - entity: "entity2"
        direction: "outer_to_inner"
)";
}

inline std::string incline(double mass, double alpha, double mu,
                           double face = 40.0) {
  return R"(scene:
  name: "incline"
  entities:
    - name: "e1"
      type: "TwoSideMassPlane"
      parameters:
        mass: )" +
         num(mass) + R"(
        incline_angle: )" +
         num(alpha) + R"(
        friction_coefficient: )" +
         num(mu) + R"(
        face_length: )" +
         num(face) + "\n";
}

inline std::string orbit(double star_mass, double radius,
                         double speed_factor = 1.0) {
  return R"(scene:
  name: "orbit"
  entities:
    - name: "e1"
      type: "SolarSystem"
      parameters:
        star_mass: )" +
         num(star_mass) + R"(
        planet_masses: [1000]
        orbit_radii: [)" +
         num(radius) + R"(]
        speed_factors: [)" +
         num(speed_factor) + "]\n";
}

inline std::string collision_1d(double m1, double m2, double u1, double u2,
                                double e) {
  return R"(scene:
  name: "collision"
  entities:
    - name: "e1"
      type: "ComplexCollisionPlane"
      parameters:
        object_types: "block block"
        masses: [)" +
         num(m1) + ", " + num(m2) + R"(]
        initial_positions: [-2, 2]
        initial_velocities: [)" +
         num(u1) + ", " + num(u2) + R"(]
        restitution: )" +
         num(e) + "\n";
}

inline std::string rocket(double m0, double m_dry, double burn_rate,
                          double exhaust, double planet_mass = 1.0,
                          double planet_radius = 10.0) {
  return R"(scene:
  name: "rocket"
  entities:
    - name: "e1"
      type: "RocketEntity"
      parameters:
        initial_mass: )" +
         num(m0) + R"(
        dry_mass: )" +
         num(m_dry) + R"(
        burn_rate: )" +
         num(burn_rate) + R"(
        exhaust_speed: )" +
         num(exhaust) + R"(
        planet_mass: )" +
         num(planet_mass) + R"(
        planet_radius: )" +
         num(planet_radius) + "\n";
}

inline std::string bar_pendulum(double length, double mass, double theta0,
                                double omega0 = 0.0) {
  return R"(scene:
  name: "pendulum"
  entities:
    - name: "e1"
      type: "RotationEntity"
      parameters:
        shape_types: "bar"
        shape_masses: [)" +
         num(mass) + R"(]
        shape_sizes: [)" +
         num(length) + R"(]
        shape_offsets: [)" +
         num(length / 2) + R"(]
        initial_angle: )" +
         num(theta0) + R"(
        initial_angular_velocity: )" +
         num(omega0) + "\n";
}

inline std::string rolling(const std::string& shape, double mass,
                           double radius, double alpha, double inner = 0.0,
                           double length = 50.0) {
  std::string doc = R"(scene:
  name: "rolling"
  entities:
    - name: "e1"
      type: "RollingEntity"
      parameters:
        shape_type: ")" +
                    shape + R"("
        mass: )" +
                    num(mass) + R"(
        radius: )" +
                    num(radius) + R"(
        incline_angle: )" +
                    num(alpha) + R"(
        incline_length: )" +
                    num(length) + "\n";
  if (inner > 0) doc += "        inner_radius: " + num(inner) + "\n";
  return doc;
}

inline std::string wedge(double M, double mL, double mR, double aL, double aR,
                         double face = 30.0) {
  std::string doc = R"(scene:
  name: "wedge"
  entities:
    - name: "e1"
      type: "MassPrismPlane"
      parameters:
        wedge_mass: )" +
                    num(M) + R"(
        left_angle: )" +
                    num(aL) + R"(
        right_angle: )" +
                    num(aR) + R"(
        face_length: )" +
                    num(face) + "\n";
  if (mL > 0) doc += "        left_mass: " + num(mL) + "\n";
  if (mR > 0) doc += "        right_mass: " + num(mR) + "\n";
  return doc;
}

inline std::string box_plane(double M, double m1, double m2) {
  return R"(scene:
  name: "box"
  entities:
    - name: "e1"
      type: "MassBoxPlane"
      parameters:
        box_mass: )" +
         num(M) + R"(
        top_mass: )" +
         num(m1) + R"(
        side_mass: )" +
         num(m2) + "\n";
}

inline std::string balls_2d(double m1, double m2, double r, double u1,
                            double e) {
  return R"(scene:
  name: "balls"
  entities:
    - name: "e1"
      type: "TwoDCollisionPlane"
      parameters:
        masses: [)" +
         num(m1) + ", " + num(m2) + R"(]
        radii: [)" +
         num(r) + ", " + num(r) + R"(]
        initial_positions: [-2, 0, 2, 0]
        initial_velocities: [)" +
         num(u1) + R"(, 0, 0, 0]
        restitution: )" +
         num(e) + "\n";
}

inline std::string cyclotron(double m, double q, double B, double speed) {
  return R"(scene:
  name: "cyclotron"
  entities:
    - name: "e1"
      type: "EmEntity"
      parameters:
        mass: )" +
         num(m) + R"(
        charge: )" +
         num(q) + R"(
        initial_velocity: [)" +
         num(speed) + R"(, 0, 0]
        magnetic_field: [0, 0, )" +
         num(B) + R"(]
        gravity: "off"
)";
}

// parse + compile + simulate in one go
inline forge::sim::Trace run(const std::string& doc, double dt = 1e-3,
                             double horizon = 10.0) {
  auto scene = forge::dsl::parse_scene(doc);
  auto model = forge::sim::compile(scene, dt, horizon);
  return forge::sim::simulate(model);
}

// Measured period of a periodic signal from its mean-crossing upstrokes,
// linearly interpolated. Needs at least two full cycles.
inline double measure_period(const std::vector<double>& t,
                             const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> crossings;
  for (std::size_t i = 1; i < x.size(); ++i) {
    double a = x[i - 1] - mean, b = x[i] - mean;
    if (a <= 0 && b > 0) {
      double w = -a / (b - a);
      crossings.push_back(t[i - 1] + w * (t[i] - t[i - 1]));
    }
  }
  if (crossings.size() < 2) return 0.0;
  return (crossings.back() - crossings.front()) /
         static_cast<double>(crossings.size() - 1);
}

}  // namespace scenes
