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

// Velocity-level task-priority controller (CLIK, optional dynamic impact
// measure, joint limits, implicit min-norm regularizer) feeding a joint
// impedance law.

#pragma once

#include <string>
#include <vector>

#include "catchsim/kinematics.hpp"
#include "catchsim/qp.hpp"

namespace catchsim {

struct ControlGains {
  Vec6 K_p = Vec6::Constant(1.0);  // Cartesian pose gain, 1/s
  Vec6 K_v = Vec6::Constant(0.5);  // velocity error gain
  VecX K_qp;                       // joint stiffness, N m/rad
  VecX K_qd;                       // joint damping, N m s/rad

  void validate(int n) const;
};

struct ControlRefs {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec6 twist = Vec6::Zero();  // (linear; angular)
};

// Integrator state owned by the loop: the previous optimal q* and dq*.
struct ControllerMemory {
  VecX q_prev;
  VecX dq_prev;
};

struct ControlOptions {
  double dt = 1e-3;
  bool dim_enabled = false;
  Vec6 u = Vec6::Zero();  // DIM direction, unit when enabled
  bool torque_clamp = true;
  // Also solve without the DIM level to report its effect on CLIK.
  bool compare_without_dim = false;
};

struct ControlTick {
  VecX dq_star;
  VecX q_star;
  VecX tau;
  VecX tau_unclamped;
  std::vector<int> clamped_joints;
  double dim_value = 0.0;
  double clik_residual = 0.0;          // ||J dq* - target||
  double clik_residual_no_dim = -1.0;  // set when compare_without_dim
  std::vector<double> level_objectives;
  double constraint_margin = 0.0;  // min distance of dq* to its bounds
  bool safe_stop = false;
  std::string event;
};

// Target twist K_v (v_d - v_a) + K_p err(x_d, x_a); the orientation error is
// the quaternion log.
Vec6 clik_target(const ControlRefs& refs, const CartesianState& actual,
                 const ControlGains& gains);

// 1/2 ||J dq - target||^2 as (H, g) with the constant dropped.
TaskLevel clik_objective(const Mat6X& J, const Vec6& target);
TaskLevel clik_objective(const ArmModel& model, const JointState& state,
                         const ControlRefs& refs, const ControlGains& gains);

// H = dt^2 grad grad^T, g = -w dt grad.
TaskLevel dim_objective(const ArmModel& model, const VecX& q, const Vec6& u,
                        double dt);
TaskLevel dim_objective(double w, const VecX& grad, double dt);

struct JointConstraintBlock {
  VecX pos_lo, pos_hi;  // on dq, from q_prev + dq dt in [q_min, q_max]
  VecX vel_lo, vel_hi;
  VecX acc_lo, acc_hi;  // from (dq - dq_prev) / dt in [-ddq_max, ddq_max]
  VecX lo, hi;          // intersection
  std::vector<int> relaxed;  // joints where the position box was dropped
};

// When the three boxes do not intersect on a joint (state outside the
// limits), the velocity/acceleration box wins and the bound is pushed to
// its end nearest the position box.
JointConstraintBlock joint_constraints(const ArmModel& model, const VecX& q_prev,
                                       const VecX& dq_prev, double dt);

// tau = K_qd (dq* - dq_a) + K_qp (q* - q_a) + C + g.
VecX joint_impedance_torque(const ControlGains& gains, const VecX& q_star,
                            const VecX& dq_star, const JointState& actual,
                            const VecX& C_vec, const VecX& g_vec);

ControlTick control_tick(const ArmModel& model, const JointState& actual,
                         const ControllerMemory& memory, const ControlRefs& refs,
                         const ControlGains& gains, const ControlOptions& options);

// Raises a lock when any joint's torque clamp stays saturated longer than
// `hold` seconds.
class TorqueLockMonitor {
 public:
  explicit TorqueLockMonitor(int n, double hold = 5e-3);
  // Returns true once locked (latched).
  bool update(const std::vector<int>& clamped_joints, double dt);
  bool locked() const { return locked_; }
  int joint() const { return joint_; }
  double longest() const;

 private:
  std::vector<double> run_;
  std::vector<double> longest_;
  double hold_;
  bool locked_ = false;
  int joint_ = -1;
};

}  // namespace catchsim
