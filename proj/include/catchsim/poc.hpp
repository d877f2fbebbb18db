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

// Post-catch phase: cubic position trajectory from the catch reference to a
// point d_lim further along the catch velocity, and the online stiffness
// schedule driven by the learned profile.

#pragma once

#include "catchsim/common.hpp"
#include "catchsim/stiffness.hpp"

namespace catchsim {

struct PocDefaults {
  double d_lim;
  double dt_poc;
};
inline constexpr PocDefaults kPocSingleAxis{0.13, 0.2};
inline constexpr PocDefaults kPocMultiAxis{0.09, 0.15};

struct PocPlan {
  Vec6 x_c = Vec6::Zero();  // catch-instant pose reference
  Vec6 v_c = Vec6::Zero();
  Vec6 x_f = Vec6::Zero();  // orientation part equals x_c
  double d_lim = 0.0;
  double dt_poc = 0.0;
  // Row i: a0 + a1 t + a2 t^2 + a3 t^3 for position axis i.
  Eigen::Matrix<double, 3, 4> coeffs = Eigen::Matrix<double, 3, 4>::Zero();
  double peak_accel = 0.0;  // max |a_i| over the plan
  bool accel_within_limit = true;
};

// Final point of the post-catch motion for a catch velocity v (translation).
Vec3 poc_final_point(const Vec3& x_c, const Vec3& v_c, double d_lim);

// Throws InvalidArgument for a zero translational catch speed or when
// dt_poc < max_i |v_i| / a_max.
PocPlan plan_poc(const Vec6& x_c, const Vec6& v_c, double d_lim, double dt_poc,
                 double a_max);

struct PocSample {
  Vec6 x = Vec6::Zero();
  Vec6 v = Vec6::Zero();
  Vec3 a = Vec3::Zero();
};

// t is time since the start of the phase, clamped to [0, dt_poc].
PocSample sample_poc(const PocPlan& plan, double t);

struct PocScaling {
  double K_d_max = 750.0;  // N/m
  double K_p_max = 45.0;
  double epsilon = 0.05;
};

struct PocStep {
  Vec6 x_d = Vec6::Zero();
  Vec6 v_d = Vec6::Zero();
  double delta_d = 0.0;
  Mat3 K_d = Mat3::Zero();          // decoded human stiffness, N/m
  Mat3 K_p_raw = Mat3::Zero();      // scaled, before filtering
  Mat3 K_p = Mat3::Zero();          // filtered
  Vec3 K_p_diag = Vec3::Zero();     // what the controller uses
  double off_diagonal_max = 0.0;    // largest discarded |K_p(i,j)|, i != j
  bool extrapolated = false;
};

double poc_distance(const PocPlan& plan, const Vec3& x_actual, double d_h);
Mat3 scale_stiffness(const Mat3& K_d, const PocScaling& scaling);
Mat3 filter_gain(const Mat3& K_new, const Mat3& K_prev, double epsilon);

PocStep poc_step(const PocPlan& plan, const StiffnessProfile& profile,
                 const Vec3& x_actual, const PocScaling& scaling,
                 const Mat3& K_prev, double t);

}  // namespace catchsim
