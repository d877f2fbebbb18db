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

// Scenario configuration: initial conditions, contact, rates, gains and the
// strategy tag of one catching run. Files are JSON; an "include" key names
// base files (relative to the including file) merged first with JSON
// merge-patch semantics, so a scenario only lists what differs.

#pragma once

#include <string>
#include <vector>

#include "catchsim/common.hpp"
#include "catchsim/estimator.hpp"
#include "catchsim/json_util.hpp"
#include "catchsim/planner.hpp"
#include "catchsim/poc.hpp"

namespace catchsim {

enum class Strategy { kFpKl, kFpKh, kVmKl, kVmKh, kVmSic, kVmVic, kVmVicDim };

const char* to_string(Strategy s);
// Accepts the tags FP-KL, FP-KH, VM-KL, VM-KH, VM-SIC, VM-VIC, VM-VIC-DIM.
Strategy parse_strategy(const std::string& tag);
const std::vector<Strategy>& all_strategies();

bool velocity_matching(Strategy s);
bool variable_impedance(Strategy s);
bool dim_enabled(Strategy s);

// Kelvin-Voigt contact between the ball and a basket: a disc of
// basket_radius with a parabolic well z = well_curvature * rho^2 in the
// tool frame. Tangential force is viscous, capped by Coulomb friction.
struct ContactConfig {
  double e = 0.6;
  double k_c = 2000.0;  // N/m
  double d_c = -1.0;    // N s/m, negative: calibrated from e
  double basket_radius = 0.10;
  double well_curvature = 5.0;  // 1/m
  double friction_mu = 0.5;
  double friction_viscous = 5.0;  // N s/m

  void validate() const;
  double damping(double object_mass) const;
};

struct RateConfig {
  double dt_phys = 1e-4;
  double dt_ctrl = 1e-3;
  double dt_plan = 1e-2;
  double dt_meas = 2e-3;

  // Each period must be an integer multiple of dt_phys.
  void validate() const;
};

struct EstimatorSettings {
  double noise_std = kDefaultMeasurementStd;
  double process_noise = kDefaultProcessNoise;
  int min_updates = 10;  // before the first prediction is used
  std::uint64_t seed = 1;

  void validate() const;
};

// Cartesian gains of the CLIK task (1/s) and the joint impedance.
struct GainSettings {
  double K_H = 45.0;
  double K_L = 20.0;
  double K_ang = 20.0;
  double K_v = 0.5;
  VecX K_qp;
  VecX K_qd;

  void validate(int n) const;
};

// Joint-side terms the controller's rigid-body model does not contain:
// reflected rotor inertia added to the diagonal of M, and viscous friction.
struct PlantSettings {
  VecX armature;          // kg m^2, empty: kDefaultArmature on every joint
  VecX viscous_friction;  // N m s/rad, empty: none

  void validate(int n) const;
  VecX armature_or_default(int n) const;
  VecX friction_or_default(int n) const;
};

inline constexpr double kDefaultArmature = 0.1;

struct ScenarioConfig {
  std::string name;
  Strategy strategy = Strategy::kVmVic;
  std::string model_path;    // empty: bundled model
  std::string profile_path;  // empty: bundled profile
  VecX q0;

  Vec3 object_position = Vec3::Zero();
  Vec3 object_velocity = Vec3::Zero();
  double object_mass = 0.1;
  double catch_plane_z = 0.35;
  bool planar = false;  // 2-D throw in the y-z plane
  double gravity = 9.81;

  ContactConfig contact;
  PlantSettings plant;
  RateConfig rates;
  EstimatorSettings estimator;
  PlannerLimits limits;
  GainSettings gains;

  double F_th = 3.0;
  double d_lim = -1.0;   // negative: single/multi-axis default
  double dt_poc = -1.0;  // negative: single/multi-axis default
  PocScaling scaling;

  double settle_window = 0.1;     // s
  double steady_tolerance = 0.2;  // N
  double t_max = 2.0;             // s
  double lock_hold = 5e-3;        // s
  bool torque_clamp = true;
  bool compare_without_dim = false;

  void validate() const;
  PocDefaults poc_defaults() const;
};

// Reads a scenario file, resolving includes (cycles are rejected).
json load_scenario_json(const std::string& path);
// Field errors are ParseError / InvalidArgument naming the field path.
// Relative model/profile paths are resolved against base_dir.
ScenarioConfig scenario_from_json(const json& j, const std::string& base_dir = "");
ScenarioConfig load_scenario(const std::string& path);
json scenario_to_json(const ScenarioConfig& c);

std::string default_scenario_dir();

}  // namespace catchsim
