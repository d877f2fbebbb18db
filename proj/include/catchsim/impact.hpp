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

// Robot-object collision: frictionless one-dimensional impulse model and the
// Kelvin-Voigt contact law used for continuous force traces.

#pragma once

#include "catchsim/common.hpp"

namespace catchsim {

struct ImpactParams {
  double e = 0.6;    // restitution
  double m_o = 0.1;  // kg
  Vec3 u = -Vec3::UnitZ();

  void validate() const;
};

struct ImpactResult {
  double impulse = 0.0;  // N s along u
  Vec6 dv_robot = Vec6::Zero();
  Vec3 dv_object = Vec3::Zero();
};

// Impulse for a robot with translational Cartesian inertia Lambda_v.
// Only the linear part of robot_twist is used; dv_robot has zero angular
// part. Throws SingularError if Lambda_v is not invertible.
ImpactResult impact_impulse(const Mat3& Lambda_v, const Vec6& robot_twist,
                            const Vec3& object_vel, const ImpactParams& params);

// Same, from the mobility Lambda_v^-1 directly (allows the rigid-base limit
// of a zero mobility).
ImpactResult impact_impulse_mobility(const Mat3& Lambda_v_inv,
                                     const Vec6& robot_twist,
                                     const Vec3& object_vel,
                                     const ImpactParams& params);

// max(0, k_c * delta + d_c * delta_rate) for delta > 0, else 0.
double compliant_contact_force(double penetration, double penetration_rate,
                               double k_c, double d_c);

// Closed-form outcome of a mass m hitting a Kelvin-Voigt wall (underdamped
// regime; separation when the contact force returns to zero).
struct ContactResponse {
  double restitution = 0.0;
  double duration = 0.0;  // s
  double max_penetration_per_speed = 0.0;  // s (delta_max / v_in)
};

ContactResponse contact_response(double k_c, double d_c, double mass);

// Damping that yields the requested restitution for (k_c, mass).
// Requires 0 < e < 1.
double calibrate_contact_damping(double k_c, double mass, double e);

}  // namespace catchsim
