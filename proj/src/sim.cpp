// Copyright 2026 The catchsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "catchsim/sim.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "catchsim/controller.hpp"
#include "catchsim/impact.hpp"
#include "catchsim/json_util.hpp"
#include "catchsim/planner.hpp"
#include "catchsim/poc.hpp"

namespace catchsim {

namespace {

constexpr double kDivergedSpeed = 1e3;  // rad/s
constexpr double kMaxContactDepth = 0.05;  // deeper means the ball passed by
constexpr double kMissedBelow = 0.05;   // m below the tool without contact

Vec3 rotation_vector(const Quat& q) {
  const Eigen::AngleAxisd aa(q.normalized());
  return aa.axis() * aa.angle();
}

}  // namespace

const char* to_string(Phase p) {
  switch (p) {
    case Phase::kPrc: return "PRC";
    case Phase::kPoc: return "POC";
    case Phase::kDone: return "DONE";
  }
  return "?";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kRunning: return "running";
    case Outcome::kCaught: return "caught";
    case Outcome::kLocked: return "locked";
    case Outcome::kMissed: return "missed";
    case Outcome::kAborted: return "aborted";
  }
  return "?";
}

ContactModel ContactModel::from(const ContactConfig& c, double object_mass,
                                double gravity) {
  c.validate();
  ContactModel m;
  m.k_c = c.k_c;
  m.d_c = c.damping(object_mass);
  m.basket_radius = c.basket_radius;
  m.well_curvature = c.well_curvature;
  m.friction_mu = c.friction_mu;
  m.friction_viscous = c.friction_viscous;
  m.object_mass = object_mass;
  m.gravity = Vec3(0.0, 0.0, -gravity);
  return m;
}

ContactSample basket_contact(const ContactModel& m, const CartesianState& tool,
                             const Vec3& p, const Vec3& v) {
  ContactSample s;
  const Mat3 R = tool.orientation.toRotationMatrix();
  const Vec3 arm = p - tool.position;
  const Vec3 r = R.transpose() * arm;
  const double rho2 = r.x() * r.x() + r.y() * r.y();
  if (rho2 > m.basket_radius * m.basket_radius) return s;
  const double gap = r.z() - m.well_curvature * rho2;
  if (gap >= 0.0 || gap < -kMaxContactDepth) return s;

  const Vec3 n_local =
      Vec3(-2.0 * m.well_curvature * r.x(), -2.0 * m.well_curvature * r.y(), 1.0)
          .normalized();
  s.normal = R * n_local;
  s.penetration = -gap * n_local.z();
  s.active = true;

  const Vec3 v_point = tool.twist.head<3>() + tool.twist.tail<3>().cross(arm);
  const Vec3 v_rel = v - v_point;
  const double rate = -v_rel.dot(s.normal);
  s.normal_force = compliant_contact_force(s.penetration, rate, m.k_c, m.d_c);
  s.force = s.normal_force * s.normal;
  const Vec3 v_t = v_rel - v_rel.dot(s.normal) * s.normal;
  const double speed_t = v_t.norm();
  if (speed_t > 0.0 && s.normal_force > 0.0) {
    const double f_t = std::min(m.friction_viscous * speed_t, m.friction_mu * s.normal_force);
    s.force -= f_t * v_t / speed_t;
  }
  return s;
}

MatX plant_inertia(const ArmModel& model, const Plant& plant, const VecX& q) {
  MatX M = joint_inertia(model, q);
  if (plant.armature.size() > 0) M.diagonal() += plant.armature;
  return M;
}

Mat3 plant_lambda_v(const ArmModel& model, const Plant& plant, const VecX& q) {
  const Eigen::LLT<MatX> llt(plant_inertia(model, plant, q));
  const Mat3X Jv = jacobian(model, q).topRows<3>();
  const Mat3 inv = Jv * llt.solve(MatX(Jv.transpose()));
  return inv.inverse();
}

WorldState step(const ArmModel& model, const Plant& plant,
                const ContactModel& contact, const WorldState& world,
                const VecX& tau, double dt) {
  const JointState& a = world.arm;
  const CartesianState tool = forward_kinematics(model, a.q, a.dq);
  const ContactSample c =
      basket_contact(contact, tool, world.object.position, world.object.velocity);

  const Vec3 on_tool = -c.force;
  const Vec3 arm = world.object.position - tool.position;
  Vec6 wrench;
  wrench << on_tool, arm.cross(on_tool);

  WorldState out = world;
  const VecX zero = VecX::Zero(a.q.size());
  VecX rhs = tau - inverse_dynamics(model, a.q, a.dq, zero);
  if (plant.viscous_friction.size() > 0) rhs -= plant.viscous_friction.cwiseProduct(a.dq);
  if (c.active) rhs += jacobian(model, a.q).transpose() * wrench;
  const Eigen::LLT<MatX> llt(plant_inertia(model, plant, a.q));
  if (llt.info() != Eigen::Success) {
    throw SimulationDiverged("step: joint inertia lost positive definiteness");
  }
  out.arm.ddq = llt.solve(rhs);
  out.arm.dq = a.dq + out.arm.ddq * dt;
  out.arm.q = a.q + out.arm.dq * dt;

  const Vec3 acc = contact.gravity + c.force / contact.object_mass;
  out.object.velocity = world.object.velocity + acc * dt;
  out.object.position = world.object.position + out.object.velocity * dt;
  out.object.in_contact = c.normal_force > 0.0;

  const Mat3 Rt = tool.orientation.toRotationMatrix().transpose();
  out.sensor_force << Rt * on_tool, Rt * wrench.tail<3>();
  out.contact_force = c.force;
  out.penetration = c.penetration;
  out.t = world.t + dt;

  if (!out.arm.dq.allFinite() || !out.arm.q.allFinite() ||
      out.arm.dq.norm() > kDivergedSpeed || !out.object.position.allFinite()) {
    throw SimulationDiverged("step: joint velocity diverged at t = " +
                             std::to_string(out.t));
  }
  return out;
}

namespace {

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, const ArmModel& model,
         const StiffnessProfile& profile, const RunOptions& opt)
      : cfg_(cfg),
        model_(model),
        profile_(profile),
        contact_(ContactModel::from(cfg.contact, cfg.object_mass, cfg.gravity)),
        tracker_(cfg.planar ? kalman_config_2d(cfg.rates.dt_meas, cfg.gravity,
                                               cfg.estimator.process_noise,
                                               std::max(cfg.estimator.noise_std, 1e-6))
                            : kalman_config_1d(cfg.rates.dt_meas, cfg.gravity,
                                               cfg.estimator.process_noise,
                                               std::max(cfg.estimator.noise_std, 1e-6)),
                 cfg.planar, cfg.object_position),
        noise_(cfg.estimator.noise_std, cfg.estimator.seed),
        lock_(model.n_dof(), cfg.lock_hold) {
    plant_.armature = cfg.plant.armature_or_default(model.n_dof());
    plant_.viscous_friction = cfg.plant.friction_or_default(model.n_dof());
    dim_ = opt.dim.value_or(dim_enabled(cfg.strategy));
    compare_ = opt.compare_without_dim.value_or(cfg.compare_without_dim);
    const int n = model.n_dof();
    if (cfg.q0.size() != n) throw InvalidArgument("q0: expected one entry per joint");

    world_.arm.q = cfg.q0;
    world_.arm.dq = VecX::Zero(n);
    world_.arm.ddq = VecX::Zero(n);
    world_.object.position = cfg.object_position;
    world_.object.velocity = cfg.object_velocity;

    const CartesianState start = forward_kinematics(model, cfg.q0);
    o_ref_ = start.orientation;
    rotvec_ = rotation_vector(start.orientation);
    home_ = start.position;
    x_ref_ = home_;
    v_ref_.setZero();
    mem_.q_prev = cfg.q0;
    mem_.dq_prev = VecX::Zero(n);
    u_.setZero();
    u_.head<3>() = -Vec3::UnitZ();
    K_lin_ = Vec3::Constant(initial_gain());
    dt_poc_ = cfg.poc_defaults().dt_poc;

    sub_ = static_cast<int>(std::lround(cfg.rates.dt_ctrl / cfg.rates.dt_phys));
    meas_every_ = static_cast<int>(std::lround(cfg.rates.dt_meas / cfg.rates.dt_phys));
    plan_every_ = static_cast<int>(std::lround(cfg.rates.dt_plan / cfg.rates.dt_ctrl));

    tr_.scenario = cfg.name;
    tr_.strategy = cfg.strategy;
    tr_.n_dof = n;
    tr_.dt_ctrl = cfg.rates.dt_ctrl;
    tr_.object_mass = cfg.object_mass;
    tr_.gravity = cfg.gravity;
    tr_.F_th = cfg.F_th;
    tr_.catch_plane_z = cfg.catch_plane_z;
    tr_.tau_lim = model.tau_lim;
    tr_.dt_poc = dt_poc_;
  }

  SimTrace run() {
    try {
      loop();
    } catch (const SimulationDiverged& e) {
      finish(Outcome::kAborted, e.what());
    }
    return std::move(tr_);
  }

 private:
  double initial_gain() const {
    switch (cfg_.strategy) {
      case Strategy::kFpKl:
      case Strategy::kVmKl:
        return cfg_.gains.K_L;
      default:
        return cfg_.gains.K_H;
    }
  }

  void event(const std::string& text) {
    tr_.events.push_back({world_.t, text});
    if (!pending_.empty()) pending_ += "; ";
    pending_ += text;
  }

  void finish(Outcome o, const std::string& why) {
    tr_.outcome = o;
    world_.phase = Phase::kDone;
    tr_.t_done = world_.t;
    event(std::string(to_string(o)) + ": " + why);
  }

  void loop() {
    const double dt = cfg_.rates.dt_ctrl;
    for (long k = 0;; ++k) {
      world_.t = static_cast<double>(k) * dt;  // no drift across ticks
      measure_and_plan(k);
      maybe_trigger();
      update_references();
      const ControlTick tick = control();
      if (lock_.update(tick.clamped_joints, dt)) {
        tr_.lock_joint = lock_.joint();
        record(tick);
        finish(Outcome::kLocked, "torque clamp held on joint " +
                                     std::to_string(lock_.joint() + 1));
        return;
      }
      record(tick);
      if (check_end()) return;
      integrate(tick.tau);
    }
  }

  void measure_and_plan(long k) {
    if (k % plan_every_ != 0 || world_.phase != Phase::kPrc || contact_seen_) return;
    if (tracker_.updates() < cfg_.estimator.min_updates) return;
    const CatchPrediction p =
        tracker_.predict(cfg_.catch_plane_z, cfg_.gravity, world_.t);
    if (!p.valid || p.t_c <= world_.t) return;
    tr_.prediction = p;
    const Vec3 dir = p.v_at_tc;
    if (dir.norm() > 1e-9) u_.head<3>() = dir.normalized();
    if (!velocity_matching(cfg_.strategy)) {
      have_target_ = true;
      return;
    }
    if (planning_closed_) return;
    Vec6 x_now, v_now;
    x_now << x_ref_, rotvec_;
    v_now << v_ref_, Vec3::Zero();
    const PlanResult r =
        plan_vm(x_now, v_now, vm_target(p, rotvec_), world_.t, cfg_.limits, cfg_.rates.dt_plan);
    tr_.max_plan_seconds = std::max(tr_.max_plan_seconds, r.solve_seconds);
    if (r.status == PlanStatus::kSolved) {
      ++tr_.plans;
      plan_ = r;
      plan_end_ = r.t0 + r.T_p * r.dt_p;
      have_plan_ = true;
    } else if (r.status == PlanStatus::kInfeasible) {
      ++tr_.infeasible_plans;
      event(std::string("plan infeasible (") + r.violated + "), holding previous plan");
    } else if (have_plan_) {
      planning_closed_ = true;  // horizon too short to replan
    }
  }

  void maybe_trigger() {
    if (world_.phase != Phase::kPrc) return;
    const bool by_force = world_.sensor_force.head<3>().norm() > cfg_.F_th;
    const bool by_time = variable_impedance(cfg_.strategy) && have_plan_ &&
                         world_.t >= plan_end_ - 1e-12;
    if (!by_force && !by_time) return;
    world_.phase = Phase::kPoc;
    tr_.t_poc = world_.t;
    tr_.poc_by_force = by_force;
    planning_closed_ = true;
    event(by_force ? "POC: force above threshold" : "POC: estimated catch time reached");
    if (!variable_impedance(cfg_.strategy)) return;

    const CartesianState now = forward_kinematics(model_, world_.arm.q, world_.arm.dq);
    Vec3 v_c = now.twist.head<3>();
    if (v_c.norm() < 0.05) {
      // Nearly at rest: follow the predicted object direction instead.
      v_c = tr_.prediction.v_at_tc.cwiseMax(-cfg_.limits.v_lin_max)
                .cwiseMin(cfg_.limits.v_lin_max);
      if (v_c.norm() < 0.05) v_c = -0.05 * Vec3::UnitZ();
    }
    const PocDefaults d = cfg_.poc_defaults();
    const double dt_min = v_c.cwiseAbs().maxCoeff() / cfg_.limits.a_lin_max;
    dt_poc_ = std::max(d.dt_poc, dt_min);
    if (dt_poc_ > d.dt_poc) {
      event("POC period stretched to " + std::to_string(dt_poc_) + " s");
    }
    Vec6 x_c, v6;
    x_c << now.position, rotvec_;
    v6 << v_c, Vec3::Zero();
    poc_ = plan_poc(x_c, v6, d.d_lim, dt_poc_, cfg_.limits.a_lin_max);
    if (!poc_.accel_within_limit) event("POC cubic exceeds the acceleration limit");
    K_prev_ = K_lin_.asDiagonal();
    tr_.dt_poc = dt_poc_;
  }

  void update_references() {
    off_diag_ = 0.0;
    const bool poc = world_.phase == Phase::kPoc;
    if (poc && variable_impedance(cfg_.strategy)) {
      const Vec3 x_act = forward_kinematics(model_, world_.arm.q).position;
      const PocStep s = poc_step(poc_, profile_, x_act, cfg_.scaling, K_prev_,
                                 world_.t - tr_.t_poc);
      x_ref_ = s.x_d.head<3>();
      v_ref_ = s.v_d.head<3>();
      K_prev_ = s.K_p;
      K_lin_ = s.K_p_diag;
      off_diag_ = s.off_diagonal_max;
      return;
    }
    if (poc && cfg_.strategy == Strategy::kVmSic) K_lin_.setConstant(cfg_.gains.K_L);

    if (!velocity_matching(cfg_.strategy)) {
      if (have_target_) x_ref_ = tr_.prediction.x_at_tc;
      v_ref_.setZero();
      return;
    }
    if (!have_plan_) return;
    if (world_.t <= plan_end_) {
      Vec6 x, v;
      sample_plan(plan_, world_.t, &x, &v);
      x_ref_ = x.head<3>();
      v_ref_ = v.head<3>();
    } else {
      x_ref_ = plan_.x_traj.col(plan_.T_p).head<3>();
      v_ref_.setZero();
    }
  }

  ControlTick control() {
    ControlRefs refs;
    refs.position = x_ref_;
    refs.orientation = o_ref_;
    refs.twist << v_ref_, Vec3::Zero();
    ControlGains gains;
    gains.K_p << K_lin_, Vec3::Constant(cfg_.gains.K_ang);
    gains.K_v.setConstant(cfg_.gains.K_v);
    gains.K_qp = cfg_.gains.K_qp;
    gains.K_qd = cfg_.gains.K_qd;
    ControlOptions o;
    o.dt = cfg_.rates.dt_ctrl;
    o.dim_enabled = dim_;
    o.u = u_;
    o.torque_clamp = cfg_.torque_clamp;
    o.compare_without_dim = compare_ && dim_;
    ControlTick tick = control_tick(model_, world_.arm, mem_, refs, gains, o);
    if (tick.safe_stop) {
      ++tr_.safe_stops;
      event(tick.event);
    } else if (!tick.event.empty() && tick.event != last_tick_event_) {
      event(tick.event);
    }
    last_tick_event_ = tick.event;
    mem_.q_prev = tick.q_star;
    mem_.dq_prev = tick.dq_star;
    return tick;
  }

  void record(const ControlTick& tick) {
    const CartesianState tool = forward_kinematics(model_, world_.arm.q, world_.arm.dq);
    TraceRow r;
    r.t = world_.t;
    r.phase = world_.phase;
    r.q = world_.arm.q;
    r.dq = world_.arm.dq;
    r.tau = tick.tau;
    r.x = tool.position;
    r.v = tool.twist.head<3>();
    r.x_d = x_ref_;
    r.v_d = v_ref_;
    r.object_x = world_.object.position;
    r.object_v = world_.object.velocity;
    r.F = world_.contact_force;
    r.contact = world_.object.in_contact;
    r.K_p = K_lin_;
    r.dim_value = tick.dim_value;
    r.clik_residual = tick.clik_residual;
    r.clik_residual_no_dim = tick.clik_residual_no_dim;
    r.off_diagonal = off_diag_;
    r.events = std::move(pending_);
    pending_.clear();
    tr_.rows.push_back(std::move(r));
  }

  bool check_end() {
    const TraceRow& r = tr_.rows.back();
    if (world_.phase == Phase::kPoc) {
      const double fz = r.F.z() - cfg_.object_mass * cfg_.gravity;
      const bool steady = r.contact && std::abs(fz) < cfg_.steady_tolerance;
      if (!steady) {
        steady_since_ = -1.0;
      } else if (steady_since_ < 0.0) {
        steady_since_ = world_.t;
      }
      if (steady_since_ >= 0.0 && world_.t - steady_since_ >= cfg_.settle_window &&
          world_.t >= tr_.t_poc + dt_poc_ + cfg_.settle_window) {
        tr_.t_steady_start = steady_since_;
        finish(Outcome::kCaught, "object at rest on the tool");
        record_final();
        return true;
      }
    }
    const bool below = !r.contact && r.object_x.z() < r.x.z() - kMissedBelow;
    if (below || r.object_x.z() < 0.0) {
      finish(Outcome::kMissed, "object fell past the tool");
      record_final();
      return true;
    }
    if (world_.t >= cfg_.t_max) {
      finish(Outcome::kMissed, "time limit reached before steady state");
      record_final();
      return true;
    }
    return false;
  }

  // Attaches the closing event to the last row.
  void record_final() {
    TraceRow& r = tr_.rows.back();
    r.phase = Phase::kDone;
    if (!r.events.empty() && !pending_.empty()) r.events += "; ";
    r.events += pending_;
    pending_.clear();
  }

  void integrate(const VecX& tau) {
    const double h = cfg_.rates.dt_phys;
    for (int s = 0; s < sub_; ++s) {
      if (phys_step_ % meas_every_ == 0 && !contact_seen_) {
        tracker_.update(noise_.sample(world_.t, world_.object.position));
      }
      const WorldState prev = world_;
      world_ = step(model_, plant_, contact_, world_, tau, h);
      world_.phase = prev.phase;
      ++phys_step_;
      bookkeeping(prev, h);
    }
  }

  void bookkeeping(const WorldState& prev, double h) {
    const bool active = world_.object.in_contact;
    const double fn = world_.contact_force.norm();
    tr_.max_penetration = std::max(tr_.max_penetration, world_.penetration);
    if (active) tr_.max_contact_force = std::max(tr_.max_contact_force, fn);
    if (active && !in_episode_) {
      in_episode_ = true;
      episode_p0_ = cfg_.object_mass * prev.object.velocity;
      episode_force_.setZero();
      episode_normal_ = 0.0;
      episode_t_ = 0.0;
      if (!contact_seen_) first_contact(prev);
    }
    if (in_episode_) {
      episode_force_ += world_.contact_force * h;
      episode_normal_ += world_.contact_force.dot(contact_normal_) * h;
      episode_t_ += h;
    }
    if (in_episode_ && !active) {
      in_episode_ = false;
      const Vec3 dp = cfg_.object_mass * world_.object.velocity - episode_p0_;
      const Vec3 expect = episode_force_ + cfg_.object_mass * contact_.gravity * episode_t_;
      const double scale = std::max(episode_force_.norm(), 1e-12);
      tr_.momentum_residual = std::max(tr_.momentum_residual, (dp - expect).norm() / scale);
      if (!first_closed_) {
        first_closed_ = true;
        tr_.first_impulse = episode_normal_;
        tr_.first_episode_duration = episode_t_;
      }
    }
  }

  void first_contact(const WorldState& prev) {
    contact_seen_ = true;
    tr_.t_first_contact = prev.t;
    const CartesianState tool = forward_kinematics(model_, prev.arm.q, prev.arm.dq);
    const ContactSample c = basket_contact(contact_, tool, world_.object.position,
                                           world_.object.velocity);
    contact_normal_ = c.active ? c.normal : Vec3::UnitZ();
    tr_.contact_robot_position = tool.position;
    tr_.contact_robot_velocity = tool.twist.head<3>();
    tr_.contact_object_velocity = prev.object.velocity;
    try {
      ImpactParams ip;
      ip.e = cfg_.contact.e;
      ip.m_o = cfg_.object_mass;
      ip.u = -contact_normal_;
      tr_.analytic_impulse =
          impact_impulse(plant_lambda_v(model_, plant_, prev.arm.q), tool.twist,
                         prev.object.velocity, ip)
              .impulse;
      const Mat3 lv = plant_lambda_v(model_, plant_, prev.arm.q);
      tr_.reflected_mass = 1.0 / ip.u.dot(lv.inverse() * ip.u);
    } catch (const SingularError& e) {
      event(std::string("impact law unavailable: ") + e.what());
    }
    pending_event_contact();
  }

  void pending_event_contact() { event("first contact"); }

  const ScenarioConfig& cfg_;
  const ArmModel& model_;
  const StiffnessProfile& profile_;
  ContactModel contact_;
  Plant plant_;
  ObjectTracker tracker_;
  MeasurementNoise noise_;
  TorqueLockMonitor lock_;
  bool dim_ = false;
  bool compare_ = false;

  WorldState world_;
  ControllerMemory mem_;
  Quat o_ref_;
  Vec3 rotvec_, home_, x_ref_, v_ref_;
  Vec6 u_;
  Vec3 K_lin_;
  Mat3 K_prev_ = Mat3::Zero();
  double off_diag_ = 0.0;
  std::string last_tick_event_;

  PlanResult plan_;
  double plan_end_ = 0.0;
  bool have_plan_ = false;
  bool planning_closed_ = false;
  bool have_target_ = false;
  PocPlan poc_;
  double dt_poc_ = 0.0;

  int sub_ = 10, meas_every_ = 20, plan_every_ = 10;
  long phys_step_ = 0;
  bool contact_seen_ = false;
  bool in_episode_ = false;
  bool first_closed_ = false;
  Vec3 episode_p0_ = Vec3::Zero();
  Vec3 episode_force_ = Vec3::Zero();
  Vec3 contact_normal_ = Vec3::UnitZ();
  double episode_normal_ = 0.0;
  double episode_t_ = 0.0;
  double steady_since_ = -1.0;
  std::string pending_;

  SimTrace tr_;
};

}  // namespace

SimTrace run_scenario(const ScenarioConfig& config, const ArmModel& model,
                      const StiffnessProfile& profile, const RunOptions& options) {
  ScenarioConfig cfg = config;
  if (options.seed) cfg.estimator.seed = *options.seed;
  if (options.k_c) cfg.contact.k_c = *options.k_c;
  cfg.validate();
  Runner runner(cfg, model, profile, options);
  return runner.run();
}

SimTrace run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const ArmModel model = config.model_path.empty() ? default_arm_model()
                                                   : load_arm_model(config.model_path);
  const StiffnessProfile profile = config.profile_path.empty()
                                       ? load_profile(default_profile_path())
                                       : load_profile(config.profile_path);
  return run_scenario(config, model, profile, options);
}

namespace {

void put(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), ",%.10g", v);
  s += buf;
}

void put_vec(std::string& s, const VecX& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put(s, v[i]);
}

}  // namespace

std::string trace_csv(const SimTrace& tr) {
  std::string s = "t,phase";
  const int n = tr.n_dof;
  for (const char* pre : {"q", "dq", "tau"}) {
    for (int i = 1; i <= n; ++i) s += "," + std::string(pre) + std::to_string(i);
  }
  for (const char* pre : {"x", "v", "x_d", "v_d", "obj_x", "obj_v", "F", "Kp"}) {
    for (const char* ax : {"x", "y", "z"}) s += "," + std::string(pre) + "_" + ax;
  }
  s += ",contact,dim,clik_residual,clik_residual_no_dim,kp_offdiag,events\n";
  for (const TraceRow& r : tr.rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", r.t);
    s += buf;
    s += ",";
    s += to_string(r.phase);
    put_vec(s, r.q);
    put_vec(s, r.dq);
    put_vec(s, r.tau);
    for (const Vec3* v : {&r.x, &r.v, &r.x_d, &r.v_d, &r.object_x, &r.object_v, &r.F, &r.K_p}) {
      put_vec(s, *v);
    }
    s += r.contact ? ",1" : ",0";
    put(s, r.dim_value);
    put(s, r.clik_residual);
    put(s, r.clik_residual_no_dim);
    put(s, r.off_diagonal);
    s += ",\"";
    for (char c : r.events) s += c == '"' ? '\'' : c;
    s += "\"\n";
  }
  return s;
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  write_text_file(path, trace_csv(trace));
}

}  // namespace catchsim
