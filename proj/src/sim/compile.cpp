#include "forge/sim/entity_base.hpp"
#include "forge/sim/model.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace forge::sim {

namespace {

// Appends `row` as a new constraint row.
void append_row(Eigen::MatrixXd& J, const Eigen::RowVectorXd& row) {
  J.conservativeResize(J.rows() + 1, row.size());
  J.row(J.rows() - 1) = row;
}

struct PortRef {
  int block;
  PortModel model;
};

// Orbital period estimate for the tightest orbit in the scene, used to scale
// dt for celestial scenes.
std::optional<double> innermost_period(const dsl::SceneSpec& scene) {
  std::optional<double> period;
  for (const auto& e : scene.entities) {
    if (e.kind != dsl::EntityKind::kSolarSystem) continue;
    double star = e.params.at("star_mass").number();
    for (double a : e.params.at("orbit_radii").list()) {
      double T = 2.0 * std::numbers::pi *
                 std::sqrt(a * a * a / (kGravitationalConstant * star));
      if (!period || T < *period) period = T;
    }
  }
  return period;
}

std::optional<double> outermost_period(const dsl::SceneSpec& scene) {
  std::optional<double> period;
  for (const auto& e : scene.entities) {
    if (e.kind != dsl::EntityKind::kSolarSystem) continue;
    double star = e.params.at("star_mass").number();
    for (double a : e.params.at("orbit_radii").list()) {
      double T = 2.0 * std::numbers::pi *
                 std::sqrt(a * a * a / (kGravitationalConstant * star));
      if (!period || T > *period) period = T;
    }
  }
  return period;
}

}  // namespace

const CompiledBody* CompiledModel::find_body(const std::string& name) const {
  for (const auto& b : bodies) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

CompiledModel compile(const dsl::SceneSpec& scene, double dt, double horizon) {
  CompiledModel model;
  model.scene = scene;
  model.gravity = scene.gravity;

  // timestep and horizon defaults; celestial scenes follow the orbit scale
  auto t_inner = innermost_period(scene);
  auto t_outer = outermost_period(scene);
  model.dt = dt > 0 ? dt : (t_inner ? 1e-4 * *t_inner : 1e-3);
  model.horizon = horizon > 0 ? horizon : (t_outer ? 1.2 * *t_outer : 10.0);
  if (model.horizon <= 0 || model.dt <= 0) {
    throw SimulationError("dt and horizon must be positive");
  }

  model.nq = 0;
  for (const auto& espec : scene.entities) {
    auto block = build_entity_block(espec, scene);
    model.offsets.push_back(model.nq);
    model.nq += block->dof();
    model.blocks.push_back(std::move(block));
  }

  model.constraints.resize(0, model.nq);

  auto block_index = [&](const std::string& entity) {
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
      if (model.blocks[i]->name() == entity) return static_cast<int>(i);
    }
    throw SimulationError("unknown entity in connection: " + entity);
  };

  auto globalize = [&](int block, const Eigen::VectorXd& local) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(model.nq);
    if (local.size() > 0) {
      row.segment(model.offsets[block], local.size()) = local.transpose();
    }
    return row;
  };

  // per-entity bodies, strings, contacts and glueable joints
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    const EntityBlock& blk = *model.blocks[b];
    auto names = blk.body_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      model.bodies.push_back(
          {blk.name() + "/" + names[i], static_cast<int>(b),
           static_cast<int>(i)});
    }
    auto strings = blk.strings();
    for (std::size_t i = 0; i < strings.size(); ++i) {
      CompiledString cs;
      cs.name = blk.name() + "/" + strings[i].name;
      cs.block = static_cast<int>(b);
      cs.local_index = static_cast<int>(i);
      if (strings[i].rigid) {
        cs.row = static_cast<int>(model.constraints.rows());
        append_row(model.constraints,
                   -globalize(static_cast<int>(b), strings[i].length_row));
      }
      model.strings.push_back(std::move(cs));
    }
    auto contacts = blk.contacts();
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      model.contacts.push_back({blk.name() + "/" + contacts[i].name,
                                static_cast<int>(b), static_cast<int>(i)});
    }
    for (auto& joint : blk.glue_joints()) {
      Eigen::MatrixXd rows(joint.rows.rows(), model.nq);
      rows.setZero();
      rows.block(0, model.offsets[b], joint.rows.rows(), blk.dof()) =
          joint.rows;
      model.joints.push_back({joint.id, joint.kind, std::move(rows)});
    }
  }

  // gather ports and mark the connected ones
  auto find_port = [&](int block, const std::string& port) {
    for (auto& p : model.blocks[block]->ports()) {
      if (p.name == port) return p;
    }
    throw SimulationError("entity '" + model.blocks[block]->name() +
                          "' has no port '" + port + "'");
  };

  std::set<std::string> connected;
  for (const auto& conn : scene.connections) {
    int ba = block_index(conn.a.entity);
    int bb = block_index(conn.b.entity);
    PortModel pa = find_port(ba, conn.a.port);
    PortModel pb = find_port(bb, conn.b.port);
    connected.insert(conn.a.entity + "/" + conn.a.port);
    connected.insert(conn.b.entity + "/" + conn.b.port);

    Vec3 span = pa.guide_pos - pb.guide_pos;
    double span_len = span.norm();
    Vec3 u = span_len > 1e-9 ? Vec3(span / span_len) : Vec3(0, 0, 1);

    Eigen::RowVectorXd row = globalize(ba, pa.internal_row) +
                             globalize(bb, pb.internal_row);
    if (pa.guide_vel_rows.size() > 0) {
      row += globalize(ba, (u.transpose() * pa.guide_vel_rows).transpose());
    }
    if (pb.guide_vel_rows.size() > 0) {
      row -= globalize(bb, (u.transpose() * pb.guide_vel_rows).transpose());
    }

    CompiledString cs;
    cs.name = "tendon:" + conn.a.entity + "/" + conn.a.port + "|" +
              conn.b.entity + "/" + conn.b.port;
    cs.block = -1;
    cs.row = static_cast<int>(model.constraints.rows());
    cs.nominal_length =
        pa.internal_length0 + pb.internal_length0 + span_len;
    append_row(model.constraints, -row);
    model.strings.push_back(cs);

    // gluing a tendon fuses both cable runs into one rigid piece
    Eigen::MatrixXd weld(0, model.nq);
    auto add_weld_row = [&](const Eigen::RowVectorXd& r) {
      if (r.cwiseAbs().maxCoeff() > 1e-12) {
        weld.conservativeResize(weld.rows() + 1, model.nq);
        weld.row(weld.rows() - 1) = r;
      }
    };
    add_weld_row(globalize(ba, pa.internal_row));
    add_weld_row(globalize(bb, pb.internal_row));
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(model.nq);
      if (pa.guide_vel_rows.size() > 0) {
        r += globalize(ba, pa.guide_vel_rows.row(axis).transpose());
      }
      if (pb.guide_vel_rows.size() > 0) {
        r -= globalize(bb, pb.guide_vel_rows.row(axis).transpose());
      }
      add_weld_row(r);
    }
    if (weld.rows() > 0) {
      model.joints.push_back({cs.name, "tendon", std::move(weld)});
    }
  }

  // load-bearing unconnected ports are tied off to the world
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    for (const auto& p : model.blocks[b]->ports()) {
      std::string key = model.blocks[b]->name() + "/" + p.name;
      if (connected.count(key) || !p.anchor_when_open) continue;
      Vec3 u = -p.anchor_offset;
      double off_len = u.norm();
      if (off_len > 1e-12) u /= off_len;
      Eigen::RowVectorXd row = globalize(static_cast<int>(b), p.internal_row);
      if (p.guide_vel_rows.size() > 0) {
        row += globalize(static_cast<int>(b),
                         (u.transpose() * p.guide_vel_rows).transpose());
      }
      CompiledString cs;
      cs.name = "anchor:" + key;
      cs.block = -1;
      cs.row = static_cast<int>(model.constraints.rows());
      cs.nominal_length = p.internal_length0 + off_len;
      append_row(model.constraints, -row);
      model.strings.push_back(cs);
    }
  }

  model.weld_rows.resize(0, model.nq);

  // initial state
  model.initial.t = 0.0;
  model.initial.q.resize(model.nq);
  model.initial.v.resize(model.nq);
  model.initial.mode.assign(model.blocks.size(), 0);
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    int off = model.offsets[b];
    int n = model.blocks[b]->dof();
    model.blocks[b]->initial_state(model.initial.q.segment(off, n),
                                   model.initial.v.segment(off, n));
  }

  if (model.constraints.rows() > 0) {
    Eigen::VectorXd resid = model.constraints * model.initial.v;
    double scale = std::max(1.0, model.initial.v.cwiseAbs().maxCoeff());
    if (resid.cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw SimulationError(
          "scene '" + scene.name +
          "': initial velocities violate the string constraints");
    }
  }
  return model;
}

}  // namespace forge::sim
