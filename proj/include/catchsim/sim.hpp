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

// Fixed-step catching simulation: arm forward dynamics under the commanded
// torques, a ballistic ball, compliant basket contact and a force sensor,
// driven by the estimator -> planner -> controller loop at nested rates.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "catchsim/arm_model.hpp"
#include "catchsim/estimator.hpp"
#include "catchsim/kinematics.hpp"
#include "catchsim/scenario.hpp"
#include "catchsim/stiffness.hpp"

namespace catchsim {

enum class Phase { kPrc, kPoc, kDone };
enum class Outcome { kRunning, kCaught, kLocked, kMissed, kAborted };

const char* to_string(Phase p);
const char* to_string(Outcome o);

// Raised by step() when the state diverges (||dq|| > 1e3 or non-finite).
class SimulationDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct ObjectState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  bool in_contact = false;
};

struct WorldState {
  double t = 0.0;
  JointState arm;
  ObjectState object;
  Phase phase = Phase::kPrc;
  // Wrench the object exerts on the tool, expressed in the tool frame
  // (force; moment about the tool origin).
  Vec6 sensor_force = Vec6::Zero();
  // Force the tool exerts on the object, world frame. Resting ball: +m g z.
  Vec3 contact_force = Vec3::Zero();
  double penetration = 0.0;  // m, along the contact normal
};

// Contact law and basket geometry with the damping already resolved.
struct ContactModel {
  double k_c = 2000.0;
  double d_c = 0.0;
  double basket_radius = 0.1;
  double well_curvature = 1.0;
  double friction_mu = 0.5;
  double friction_viscous = 5.0;
  double object_mass = 0.1;
  Vec3 gravity{0.0, 0.0, -9.81};

  static ContactModel from(const ContactConfig& c, double object_mass,
                           double gravity);
};

struct ContactSample {
  bool active = false;
  Vec3 force = Vec3::Zero();   // on the object, world frame
  Vec3 normal = Vec3::UnitZ();  // basket normal at the contact, world frame
  double penetration = 0.0;
  double normal_force = 0.0;
};

ContactSample basket_contact(const ContactModel& m, const CartesianState& tool,
                             const Vec3& p, const Vec3& v);

// Plant-side joint terms (see PlantSettings); empty vectors mean none.
struct Plant {
  VecX armature;
  VecX viscous_friction;
};

// M + diag(armature), the inertia the simulated joints actually have.
MatX plant_inertia(const ArmModel& model, const Plant& plant, const VecX& q);
// Translational Cartesian inertia of the simulated plant.
Mat3 plant_lambda_v(const ArmModel& model, const Plant& plant, const VecX& q);

// One semi-implicit Euler step of arm plus object:
//   (M + A) ddq = tau + J^T F_ext - C - g - B dq.
// `tau` is held over dt. Throws SimulationDiverged on blow-up.
WorldState step(const ArmModel& model, const Plant& plant,
                const ContactModel& contact, const WorldState& world,
                const VecX& tau, double dt);

// One row per control tick.
struct TraceRow {
  double t = 0.0;
  Phase phase = Phase::kPrc;
  VecX q, dq, tau;
  Vec3 x = Vec3::Zero();  // tool position
  Vec3 v = Vec3::Zero();  // tool linear velocity
  Vec3 x_d = Vec3::Zero();
  Vec3 v_d = Vec3::Zero();
  Vec3 object_x = Vec3::Zero();
  Vec3 object_v = Vec3::Zero();
  Vec3 F = Vec3::Zero();  // on the object, world frame
  bool contact = false;
  Vec3 K_p = Vec3::Zero();  // translational CLIK gains in use
  double dim_value = 0.0;
  double clik_residual = 0.0;
  double clik_residual_no_dim = -1.0;
  double off_diagonal = 0.0;
  std::string events;
};

struct SimEvent {
  double t = 0.0;
  std::string text;
};

struct SimTrace {
  std::string scenario;
  Strategy strategy = Strategy::kVmVic;
  int n_dof = 0;
  double dt_ctrl = 1e-3;
  double object_mass = 0.1;
  double gravity = 9.81;
  double F_th = 3.0;
  double catch_plane_z = 0.35;
  VecX tau_lim;

  std::vector<TraceRow> rows;
  std::vector<SimEvent> events;
  Outcome outcome = Outcome::kRunning;

  double t_first_contact = -1.0;
  double t_poc = -1.0;           // POC trigger
  bool poc_by_force = false;
  double dt_poc = 0.0;           // duration of the post-catch motion in use
  double t_steady_start = -1.0;  // start of the steady window
  double t_done = -1.0;
  int lock_joint = -1;

  // Last catch prediction used by the planner (x_o at t_c).
  CatchPrediction prediction;

  // Physics-rate contact bookkeeping.
  double first_impulse = 0.0;  // integral of the normal force, first episode
  double first_episode_duration = 0.0;
  double analytic_impulse = 0.0;  // rigid impact law at first contact
  double reflected_mass = 0.0;    // along the contact normal at first contact
  Vec3 contact_robot_position = Vec3::Zero();
  Vec3 contact_robot_velocity = Vec3::Zero();
  Vec3 contact_object_velocity = Vec3::Zero();
  double max_penetration = 0.0;
  double max_contact_force = 0.0;  // normal force, physics rate
  // max over contact episodes of |object momentum change - force integral|
  // relative to the force integral.
  double momentum_residual = 0.0;

  int plans = 0;
  int infeasible_plans = 0;
  double max_plan_seconds = 0.0;
  int safe_stops = 0;
};

struct RunOptions {
  std::optional<bool> dim;  // overrides the strategy's DIM setting
  std::optional<std::uint64_t> seed;
  std::optional<double> k_c;
  std::optional<bool> compare_without_dim;
};

// Loads the model and profile named by the config (or the bundled ones).
SimTrace run_scenario(const ScenarioConfig& config, const RunOptions& options = {});
SimTrace run_scenario(const ScenarioConfig& config, const ArmModel& model,
                      const StiffnessProfile& profile,
                      const RunOptions& options = {});

std::string trace_csv(const SimTrace& trace);
void write_trace_csv(const SimTrace& trace, const std::string& path);

}  // namespace catchsim
