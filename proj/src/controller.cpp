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

#include "catchsim/controller.hpp"

#include <algorithm>
#include <cmath>

namespace catchsim {

void ControlGains::validate(int n) const {
  require_size(K_qp.size(), n, "ControlGains.K_qp");
  require_size(K_qd.size(), n, "ControlGains.K_qd");
  if (!((K_p.array() > 0.0).all() && (K_v.array() > 0.0).all() &&
        (K_qp.array() > 0.0).all() && (K_qd.array() > 0.0).all())) {
    throw InvalidArgument("ControlGains: all gains must be > 0");
  }
}

Vec6 clik_target(const ControlRefs& refs, const CartesianState& actual,
                 const ControlGains& gains) {
  const Vec6 err = pose_error(refs.position, refs.orientation, actual.position,
                              actual.orientation);
  return gains.K_v.cwiseProduct(refs.twist - actual.twist) + gains.K_p.cwiseProduct(err);
}

TaskLevel clik_objective(const Mat6X& J, const Vec6& target) {
  TaskLevel t;
  t.name = "clik";
  t.H = J.transpose() * J;
  t.g = -J.transpose() * target;
  return t;
}

TaskLevel clik_objective(const ArmModel& model, const JointState& state,
                         const ControlRefs& refs, const ControlGains& gains) {
  const CartesianState actual = forward_kinematics(model, state.q, state.dq);
  return clik_objective(jacobian(model, state.q), clik_target(refs, actual, gains));
}

TaskLevel dim_objective(double w, const VecX& grad, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dim_objective: dt must be > 0");
  TaskLevel t;
  t.name = "dim";
  t.H = dt * dt * grad * grad.transpose();
  t.g = -w * dt * grad;
  return t;
}

TaskLevel dim_objective(const ArmModel& model, const VecX& q, const Vec6& u,
                        double dt) {
  if (std::abs(u.norm() - 1.0) > 1e-9) throw InvalidArgument("dim_objective: u must be unit");
  return dim_objective(dim_index(model, q, u), dim_gradient(model, q, u), dt);
}

JointConstraintBlock joint_constraints(const ArmModel& model, const VecX& q_prev,
                                       const VecX& dq_prev, double dt) {
  const int n = model.n_dof();
  require_size(q_prev.size(), n, "joint_constraints q_prev");
  require_size(dq_prev.size(), n, "joint_constraints dq_prev");
  if (!(dt > 0.0)) throw InvalidArgument("joint_constraints: dt must be > 0");
  JointConstraintBlock b;
  b.pos_lo = (model.q_min - q_prev) / dt;
  b.pos_hi = (model.q_max - q_prev) / dt;
  b.vel_lo = -model.dq_max;
  b.vel_hi = model.dq_max;
  b.acc_lo = dq_prev - model.ddq_max * dt;
  b.acc_hi = dq_prev + model.ddq_max * dt;
  b.lo.resize(n);
  b.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    double lo = std::max(b.vel_lo(i), b.acc_lo(i));
    double hi = std::min(b.vel_hi(i), b.acc_hi(i));
    if (lo > hi) {
      // Previous rate beyond the velocity limit: decelerate at full rate.
      lo = hi = dq_prev(i) > b.vel_hi(i) ? b.acc_lo(i) : b.acc_hi(i);
    }
    if (b.pos_hi(i) < lo) {
      b.relaxed.push_back(i);
      hi = lo;
    } else if (b.pos_lo(i) > hi) {
      b.relaxed.push_back(i);
      lo = hi;
    } else {
      lo = std::max(lo, b.pos_lo(i));
      hi = std::min(hi, b.pos_hi(i));
    }
    b.lo(i) = lo;
    b.hi(i) = hi;
  }
  return b;
}

VecX joint_impedance_torque(const ControlGains& gains, const VecX& q_star,
                            const VecX& dq_star, const JointState& actual,
                            const VecX& C_vec, const VecX& g_vec) {
  return gains.K_qd.cwiseProduct(dq_star - actual.dq) +
         gains.K_qp.cwiseProduct(q_star - actual.q) + C_vec + g_vec;
}

namespace {

double clik_residual(const Mat6X& J, const Vec6& target, const VecX& dq) {
  return (J * dq - target).norm();
}

}  // namespace

ControlTick control_tick(const ArmModel& model, const JointState& actual,
                         const ControllerMemory& memory, const ControlRefs& refs,
                         const ControlGains& gains, const ControlOptions& options) {
  const int n = model.n_dof();
  require_size(actual.q.size(), n, "control_tick q");
  require_size(actual.dq.size(), n, "control_tick dq");
  gains.validate(n);
  if (!(options.dt > 0.0)) throw InvalidArgument("control_tick: dt must be > 0");

  JointState state{actual.q, actual.dq, VecX()};
  const DynamicsEval dyn = dynamics(model, state);
  const CartesianState cart = forward_kinematics(model, actual.q, actual.dq);
  const Vec6 target = clik_target(refs, cart, gains);

  ControlTick tick;
  TaskStack stack;
  stack.levels.push_back(clik_objective(dyn.J, target));
  const bool have_u = options.u.norm() > 0.0;
  if (have_u) tick.dim_value = dim_index(model, actual.q, options.u.normalized());
  if (options.dim_enabled) {
    if (!have_u) throw InvalidArgument("control_tick: DIM enabled without a direction");
    const Vec6 u = options.u.normalized();
    stack.levels.push_back(
        dim_objective(tick.dim_value, dim_gradient(model, actual.q, u), options.dt));
  }
  const JointConstraintBlock block =
      joint_constraints(model, memory.q_prev, memory.dq_prev, options.dt);
  stack.constraints = QPProblem(n);
  stack.constraints.var_lb = block.lo;
  stack.constraints.var_ub = block.hi;

  HierarchyResult sol;
  std::string failure;
  if (!target.allFinite() || !stack.levels.back().g.allFinite()) {
    failure = "non-finite task";
  } else {
    try {
      sol = solve_hierarchy(stack);
      if (sol.status != QPStatus::kOptimal || !sol.x.allFinite()) {
        failure = std::string("hierarchy ") + to_string(sol.status) + " at level " +
                  std::to_string(sol.failed_level);
      }
    } catch (const Error& e) {
      failure = e.what();
    }
  }
  if (!failure.empty()) {
    tick.safe_stop = true;
    tick.event = "safe_stop: " + failure;
    tick.dq_star = VecX::Zero(n);
    tick.q_star = memory.q_prev;
    tick.tau = dyn.g_vec;
    tick.tau_unclamped = tick.tau;
    tick.clik_residual = target.norm();
    return tick;
  }

  tick.dq_star = sol.x;
  tick.q_star = memory.q_prev + tick.dq_star * options.dt;
  tick.level_objectives = sol.objective_final;
  tick.clik_residual = clik_residual(dyn.J, target, tick.dq_star);
  tick.constraint_margin = std::min((tick.dq_star - block.lo).minCoeff(),
                                    (block.hi - tick.dq_star).minCoeff());
  if (!block.relaxed.empty()) tick.event = "joint_limit_relaxed";
  if (options.compare_without_dim && options.dim_enabled) {
    TaskStack clik_only = stack;
    clik_only.levels.resize(1);
    const HierarchyResult base = solve_hierarchy(clik_only);
    if (base.status == QPStatus::kOptimal) {
      tick.clik_residual_no_dim = clik_residual(dyn.J, target, base.x);
    }
  }

  tick.tau_unclamped = joint_impedance_torque(gains, tick.q_star, tick.dq_star, state,
                                              dyn.C_vec, dyn.g_vec);
  tick.tau = tick.tau_unclamped;
  if (options.torque_clamp) {
    for (int i = 0; i < n; ++i) {
      const double lim = model.tau_lim(i);
      if (std::abs(tick.tau(i)) > lim) {
        tick.tau(i) = std::copysign(lim, tick.tau(i));
        tick.clamped_joints.push_back(i);
      }
    }
  }
  return tick;
}

TorqueLockMonitor::TorqueLockMonitor(int n, double hold)
    : run_(n, 0.0), longest_(n, 0.0), hold_(hold) {}

bool TorqueLockMonitor::update(const std::vector<int>& clamped_joints, double dt) {
  std::vector<bool> on(run_.size(), false);
  for (int j : clamped_joints) on.at(j) = true;
  for (std::size_t j = 0; j < run_.size(); ++j) {
    run_[j] = on[j] ? run_[j] + dt : 0.0;
    longest_[j] = std::max(longest_[j], run_[j]);
    // Half a tick of slack keeps the count exact under rounding.
    if (!locked_ && run_[j] > hold_ + 0.5 * dt) {
      locked_ = true;
      joint_ = static_cast<int>(j);
    }
  }
  return locked_;
}

double TorqueLockMonitor::longest() const {
  return longest_.empty() ? 0.0 : *std::max_element(longest_.begin(), longest_.end());
}

}  // namespace catchsim
