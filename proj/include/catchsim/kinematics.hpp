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

// Serial-chain kinematics and rigid-body dynamics.
//
// Conventions: all Cartesian 6-vectors are ordered (linear; angular). The
// geometric Jacobian maps joint rates to the tool twist expressed in the
// world frame at the tool origin. Wrenches applied at the tool are ordered
// (force; moment) so that tau_ext = J^T F.

#pragma once

#include <vector>

#include "catchsim/arm_model.hpp"
#include "catchsim/common.hpp"

namespace catchsim {

struct JointState {
  VecX q;
  VecX dq;
  VecX ddq;  // may be empty
};

struct CartesianState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec6 twist = Vec6::Zero();
};

struct DynamicsEval {
  MatX M;
  VecX C_vec;
  VecX g_vec;
  Mat6X J;
  Mat6 Lambda;
  Mat3 Lambda_v;
  // cond(J M^-1 J^T) above kNearSingularCondition; Lambda is then the damped
  // inverse.
  bool near_singular = false;
  double condition = 1.0;
};

inline constexpr double kPinvDamping = 1e-6;
inline constexpr double kNearSingularCondition = 1e8;

// World pose of every joint frame (index i is the frame of joint i).
std::vector<Eigen::Isometry3d> joint_frames(const ArmModel& model,
                                            const VecX& q);
Eigen::Isometry3d tool_pose(const ArmModel& model, const VecX& q);

CartesianState forward_kinematics(const ArmModel& model, const VecX& q);
CartesianState forward_kinematics(const ArmModel& model, const VecX& q,
                                  const VecX& dq);

Mat6X jacobian(const ArmModel& model, const VecX& q);

// Composite-rigid-body joint inertia matrix.
MatX joint_inertia(const ArmModel& model, const VecX& q);

// Recursive Newton-Euler: M ddq + C(q, dq) + g(q). Gravity is included
// when with_gravity is set.
VecX inverse_dynamics(const ArmModel& model, const VecX& q, const VecX& dq,
                      const VecX& ddq, bool with_gravity = true);

VecX coriolis_vector(const ArmModel& model, const VecX& q, const VecX& dq);
VecX gravity_vector(const ArmModel& model, const VecX& q);

DynamicsEval dynamics(const ArmModel& model, const JointState& state);

// ddq = M^-1 (tau + J^T f_ext - C - g). f_ext is a tool wrench (may be
// empty for none).
VecX forward_dynamics(const ArmModel& model, const VecX& q, const VecX& dq,
                      const VecX& tau, const Vec6& tool_wrench);

// Damped Moore-Penrose pseudoinverse, (A^T A + lambda^2 I)^-1 A^T or the
// equivalent row form, whichever system is smaller.
MatX damped_pinv(const MatX& a, double damping = kPinvDamping);

// Inverse of a symmetric positive semidefinite matrix with eigenvalues
// s replaced by s / (s^2 + damping^2). Writes cond(A) when requested.
MatX damped_spd_inverse(const MatX& a, double damping, double* condition);

// Reflected mass along the unit direction u (world frame):
//   m_u = (u^T Lambda_v^-1 u)^-1.
// Throws SingularError when the tool cannot move along u.
double reflected_mass(const ArmModel& model, const VecX& q, const Vec3& u);

// Dynamic impact measure along the unit 6-direction u:
//   w = u^T J+^T M M^T J+ u, with J+ the damped pseudoinverse.
double dim_index(const ArmModel& model, const VecX& q, const Vec6& u);

// Same measure restricted to the translational Jacobian rows.
double dim_index_translational(const ArmModel& model, const VecX& q,
                               const Vec3& u);

// Central-difference gradient of dim_index with respect to q.
VecX dim_gradient(const ArmModel& model, const VecX& q, const Vec6& u,
                  double step = 1e-6);

// Quaternion-log orientation error taking `actual` to `desired`, world
// frame (axis * angle).
Vec3 orientation_error(const Quat& desired, const Quat& actual);

// 6-vector pose error (position difference; orientation log error).
Vec6 pose_error(const Vec3& p_des, const Quat& o_des, const Vec3& p_act,
                const Quat& o_act);

struct IkResult {
  VecX q;
  double position_error = 0.0;
  double orientation_error = 0.0;
  bool converged = false;
};

// Damped least-squares position+orientation IK from a seed, joint limits
// respected by clamping.
IkResult inverse_kinematics(const ArmModel& model, const Vec3& position,
                            const Quat& orientation, const VecX& q_seed,
                            int max_iterations = 500);

}  // namespace catchsim
