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

// Pre-contact Cartesian planner. Trajectories are sampled at dt_p; sample k
// holds velocity v_k applied over [k dt_p, (k+1) dt_p) so that
//   x_{k+1} = x_k + dt_p v_k,  x_0 = current pose.
// Poses are 6-vectors (position; orientation coordinates), the latter a
// rotation vector relative to a fixed reference frame.

#pragma once

#include <string>

#include "catchsim/common.hpp"
#include "catchsim/estimator.hpp"
#include "catchsim/qp.hpp"

namespace catchsim {

struct PlannerLimits {
  Vec6 x_min = Vec6::Constant(-1e3);
  Vec6 x_max = Vec6::Constant(1e3);
  double v_lin_max = 1.0;
  double v_ang_max = 2.5;
  double a_lin_max = 6.0;
  double a_ang_max = 25.0;

  void validate() const;
  Vec6 v_max() const;
  Vec6 a_max() const;
};

inline constexpr int kMaxPlanSamples = 100;
// Small velocity regularizer making the velocity-matching QP strictly convex.
inline constexpr double kPlanRegularization = 1e-4;

enum class PlanStatus { kSolved, kInfeasible, kDegenerateHorizon };

const char* to_string(PlanStatus s);

struct PlanResult {
  MatX v_traj;  // 6 x T_p
  MatX x_traj;  // 6 x (T_p + 1), column 0 is the start pose
  int T_p = 0;
  double dt_p = 0.0;
  double t0 = 0.0;  // absolute time of column 0
  PlanStatus status = PlanStatus::kDegenerateHorizon;
  // "position", "velocity", "acceleration" or "" when solved.
  std::string violated;
  double objective = 0.0;  // 1/2 ||v_final - v_target||^2
  int iterations = 0;
  double solve_seconds = 0.0;

  // Velocities stacked sample by sample (6 T_p).
  VecX stacked_velocity() const;
  // Positions x_1..x_T stacked sample by sample (6 T_p).
  VecX stacked_position() const;
};

struct VmTarget {
  Vec6 x = Vec6::Zero();
  Vec6 v = Vec6::Zero();
  double t_c = 0.0;
};

// Builds the 6-D target from a catch prediction; the orientation rows keep
// `orientation` with zero angular velocity.
VmTarget vm_target(const CatchPrediction& prediction, const Vec3& orientation);

// Velocity matching with the catch pose as a hard equality. T_p is
// round((t_c - now) / dt_p); horizons above kMaxPlanSamples are covered with
// a coarser step, and the step is stretched so that T_p dt_p = t_c - now.
// The first acceleration row is taken against v_now.
PlanResult plan_vm(const Vec6& x_now, const Vec6& v_now, const VmTarget& target,
                   double now, const PlannerLimits& limits, double dt_p);

// Same, with the orientation target equal to the current orientation.
PlanResult plan_vm(const Vec6& x_now, const Vec6& v_now,
                   const CatchPrediction& prediction, double now,
                   const PlannerLimits& limits, double dt_p);

// Per-axis QP behind plan_vm, exposed for testing.
QPProblem vm_axis_problem(double x0, double v0, double displacement_target,
                          double v_target, int T, double dt, double x_lo,
                          double x_hi, double v_max, double a_max);

struct SoftWeights {
  double alpha = 1.0;
  double beta = 10.0;
  double gamma = 0.1;
};

// Object samples for the soft formulation: x_obj columns are object poses at
// samples 1..T, v_obj columns object velocities at samples 0..T-1.
struct ObjectTrajectory {
  MatX x_obj;  // 6 x T
  MatX v_obj;  // 6 x T
};

// Soft-priority trajectory tracking over the full flight:
//   1/2 (alpha ||v - v_O||^2 + beta ||x - x_O||^2 - gamma ||G x||^2)
// subject to the limits. `selector` is the diagonal of the per-sample
// selection matrix (z only by default). Throws NumericalError if the
// assembled Hessian is not positive definite.
PlanResult plan_soft_legacy(const Vec6& x_now, const Vec6& v_now,
                            const ObjectTrajectory& object,
                            const SoftWeights& weights, const Vec6& selector,
                            const PlannerLimits& limits, double dt);

// Hessian of one axis of the soft formulation (T x T).
MatX soft_axis_hessian(int T, double dt, const SoftWeights& w, double select);

// Height of the soft plan at the sample closest to the object (in z).
double legacy_catch_height(const PlanResult& plan,
                           const ObjectTrajectory& object);

struct ReferenceStream {
  VecX t;    // absolute times
  MatX x;    // 6 x N
  MatX v;    // 6 x N
};

// Dense reference at the control period: velocity linearly interpolated
// between knots, position integrated from the piecewise-constant plan
// velocity so it passes through every knot.
ReferenceStream resample_plan(const PlanResult& plan, double dt_ctrl);

// Reference at an absolute time (clamped to the plan span).
void sample_plan(const PlanResult& plan, double t, Vec6* x, Vec6* v);

}  // namespace catchsim
