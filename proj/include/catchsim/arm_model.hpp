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

#pragma once

#include <string>
#include <vector>

#include "catchsim/common.hpp"

namespace catchsim {

// One revolute joint plus the link it moves, described with the modified
// (proximal) Denavit-Hartenberg convention:
//   T_{i-1,i} = RotX(alpha) * TransX(a) * RotZ(q + theta_offset) * TransZ(d)
struct LinkParams {
  double a = 0.0;             // m, along x_{i-1}
  double alpha = 0.0;         // rad, about x_{i-1}
  double d = 0.0;             // m, along z_i
  double theta_offset = 0.0;  // rad
  double mass = 0.0;          // kg
  Vec3 com = Vec3::Zero();    // m, link frame
  Mat3 inertia = Mat3::Zero();  // kg m^2 about the COM, link frame
};

struct ArmModel {
  std::string name;
  std::vector<LinkParams> links;
  VecX q_min, q_max;  // rad
  VecX dq_max;        // rad/s
  VecX ddq_max;       // rad/s^2
  VecX tau_lim;       // N m
  Vec3 gravity{0.0, 0.0, -9.81};
  Eigen::Isometry3d tool = Eigen::Isometry3d::Identity();  // in last link
  double tool_mass = 0.0;
  Vec3 tool_com = Vec3::Zero();      // last-link frame
  Mat3 tool_inertia = Mat3::Zero();  // about tool_com, last-link frame

  // Tool pose at q = 0 as stored in the model file (self-description used
  // as a forward-kinematics fixture); empty when the file has none.
  std::vector<double> reference_zero_position;
  std::vector<double> reference_zero_quaternion;  // w, x, y, z

  int n_dof() const { return static_cast<int>(links.size()); }

  // Throws InvalidArgument naming the offending field.
  void validate() const;

  // Link inertial parameters with the tool lumped into the last link.
  std::vector<LinkParams> lumped_links() const;
};

inline constexpr int kArmModelFormatVersion = 1;

ArmModel load_arm_model(const std::string& path);
ArmModel parse_arm_model(const std::string& text);
std::string serialize_arm_model(const ArmModel& model);
void save_arm_model(const ArmModel& model, const std::string& path);

// Path of the bundled 7-DoF model file.
std::string default_arm_model_path();
ArmModel default_arm_model();

// Planar chain in the world xy plane, revolute about z, gravity along -y,
// with point masses at each link tip. Used for closed-form checks.
ArmModel make_planar_arm(const std::vector<double>& lengths,
                         const std::vector<double>& tip_masses,
                         double gravity = 9.81);

}  // namespace catchsim
