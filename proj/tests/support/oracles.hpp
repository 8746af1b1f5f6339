#pragma once

// Closed-form references used to check the simulator. These are independent
// pencil-and-paper results; they must not call into the library under test.

#include <cmath>
#include <numbers>
#include <utility>

namespace oracles {

inline constexpr double kG = 6.674e-11;

// Atwood machine, ideal pulley: downward acceleration of m1.
inline double atwood_accel(double m1, double m2, double g) {
  return (m1 - m2) * g / (m1 + m2);
}

inline double atwood_tension(double m1, double m2, double g) {
  return 2.0 * m1 * m2 * g / (m1 + m2);
}

// Block sliding down a rough incline (downhill positive).
inline double incline_accel(double g, double alpha, double mu) {
  return g * (std::sin(alpha) - mu * std::cos(alpha));
}

// Free fall from rest: speed after t.
inline double free_fall_speed(double g, double t) { return g * t; }

// Vertical throw at v0: maximum height above launch.
inline double throw_max_height(double v0, double g) {
  return v0 * v0 / (2.0 * g);
}

// Projectile speed at time t for launch velocity (vx, vz).
inline double projectile_speed(double vx, double vz, double g, double t) {
  return std::hypot(vx, vz - g * t);
}

// Kepler: circular/elliptic orbit period for semi-major axis a.
inline double kepler_period(double a, double star_mass) {
  return 2.0 * std::numbers::pi * std::sqrt(a * a * a / (kG * star_mass));
}

// 1D collision with restitution e: final velocities.
inline std::pair<double, double> collide_1d(double m1, double m2, double u1,
                                            double u2, double e) {
  double v1 = (m1 * u1 + m2 * u2 + m2 * e * (u2 - u1)) / (m1 + m2);
  double v2 = (m1 * u1 + m2 * u2 + m1 * e * (u1 - u2)) / (m1 + m2);
  return {v1, v2};
}

// Tsiolkovsky: velocity gained burning from m0 down to m_dry, gravity-free.
inline double rocket_delta_v(double exhaust_speed, double m0, double m_dry) {
  return exhaust_speed * std::log(m0 / m_dry);
}

// Small-angle compound pendulum period.
inline double pendulum_period(double inertia_pivot, double mass, double g,
                              double com_distance) {
  return 2.0 * std::numbers::pi *
         std::sqrt(inertia_pivot / (mass * g * com_distance));
}

// Uniform bar of length l (square section w) pivoted at one end.
inline double bar_end_pendulum_period(double l, double w, double g) {
  double i_com = (l * l + w * w) / 12.0;
  double i_pivot = i_com + 0.25 * l * l;  // parallel axis, COM at l/2
  return 2.0 * std::numbers::pi * std::sqrt(i_pivot / (g * 0.5 * l));
}

// Movable wedge (mass M) with blocks mL, mR on faces aL, aR joined by a
// string over the apex, frictionless everywhere. Returns the block
// acceleration s'' (mL up its face / mR down its face) and the wedge
// acceleration X''.
inline std::pair<double, double> wedge_two_mass_accel(double M, double mL,
                                                      double mR, double aL,
                                                      double aR, double g) {
  double tot = M + mL + mR;
  double c = mL * std::cos(aL) + mR * std::cos(aR);
  double mu = mL + mR;
  double fs = g * (mR * std::sin(aR) - mL * std::sin(aL));
  double s_dd = tot * fs / (tot * mu - c * c);
  double x_dd = -c * s_dd / tot;
  return {s_dd, x_dd};
}

// Single block m on the right face (angle a) of a movable wedge M,
// frictionless: relative block acceleration down the face.
inline double wedge_single_mass_accel(double M, double m, double a, double g) {
  double tot = M + m;
  double c = m * std::cos(a);
  double fs = g * m * std::sin(a);
  return tot * fs / (tot * m - c * c);
}

// Large block M free to slide, top block m1 joined over a corner guide to a
// hanging block m2, frictionless: descent acceleration of m2.
inline double box_plane_accel(double M, double m1, double m2, double g) {
  double tot = M + m1 + m2;
  return m2 * g / (m1 + m2 - m1 * m1 / tot);
}

// Shape rolling without slipping down an incline: c = I/(m r^2).
inline double rolling_accel(double g, double alpha, double c) {
  return g * std::sin(alpha) / (1.0 + c);
}

// Charged particle in a uniform magnetic field: cyclotron period.
inline double cyclotron_period(double m, double q, double B) {
  return 2.0 * std::numbers::pi * m / (std::abs(q) * B);
}

// Block on a rough table pulled by a hanging mass over an edge pulley.
inline double table_pulley_accel(double m_table, double m_hang, double mu,
                                 double g) {
  return (m_hang - mu * m_table) * g / (m_table + m_hang);
}

// Mass on an incline (angle a) tied over the top edge to a hanging mass.
inline double incline_pulley_accel(double m_inc, double m_hang, double a,
                                   double g) {
  return (m_hang - m_inc * std::sin(a)) * g / (m_inc + m_hang);
}

}  // namespace oracles
