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

// Geometric human-arm endpoint stiffness, its Cholesky vector encoding, the
// stiffness profile (GMM over distance-from-catch and Cholesky vector) and a
// synthetic demonstration generator standing in for recorded human data.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catchsim/common.hpp"
#include "catchsim/gmm.hpp"

namespace catchsim {

struct ArmTriangle {
  Vec3 shoulder = Vec3::Zero();
  Vec3 elbow = Vec3::Zero();
  Vec3 hand = Vec3::Zero();
  double activation = 0.0;  // p in [0, 1]
};

struct StiffnessModelParams {
  double c1 = 2033.325;
  double c2 = 140.606;
  double alpha1 = 0.255;
  double alpha2 = 2.815;

  double a_cc(double p) const { return c1 * p + c2; }
};

struct StiffnessEllipsoid {
  Mat3 V = Mat3::Identity();  // columns: major, median, minor axis
  Mat3 D = Mat3::Identity();  // A_cc * D_s
  Mat3 K = Mat3::Identity();  // V D V^T, N/m
  double a_cc = 0.0;
  double d1 = 0.0, d2 = 0.0;
  StiffnessModelParams params;
};

// Throws InvalidArgument when the triangle area is <= 1e-9 m^2 or p is
// outside [0, 1].
StiffnessEllipsoid estimate_stiffness(const ArmTriangle& tri,
                                      const StiffnessModelParams& params = {});

// K = L^T L with L upper triangular; vector (L11, L12, L13, L22, L23, L33).
Vec6 chol_encode(const Mat3& K);
Mat3 chol_decode(const Vec6& l);
Mat3 chol_upper(const Vec6& l);

inline constexpr double kHumanMovementLength = -0.27;  // d_h, m

// Stiffness along distance from the catch point. Inputs are
// delta_d in [d_h, 0] (d_h < 0), outputs Cholesky vectors.
struct StiffnessProfile {
  Gmm gmm;
  double d_h = kHumanMovementLength;
  double log_likelihood = 0.0;
  std::string generator;  // provenance of the training data
  std::uint64_t seed = 0;
};

struct StiffnessQuery {
  Vec6 chol = Vec6::Zero();
  Mat3 K = Mat3::Zero();
  bool extrapolated = false;
};

StiffnessQuery gmr_predict(const StiffnessProfile& profile, double delta_d);

struct DemoSample {
  double delta_d = 0.0;  // m, <= 0
  Vec6 chol = Vec6::Zero();
};

struct SynthDemoParams {
  double d_h = kHumanMovementLength;
  double k_start = 140.0;   // z stiffness at the catch point, N/m
  double k_end = 1100.0;    // z stiffness at the end of the movement, N/m
  int samples_per_demo = 60;
  double activation_noise = 0.0;  // std of p
  double distance_noise = 0.0;    // std of delta_d, m
  // Arm geometry (shoulder at the origin): catch-point hand position,
  // segment lengths and the preferred elbow direction.
  Vec3 hand_start = Vec3(0.35, 0.10, -0.05);
  double upper_arm = 0.30;
  double forearm = 0.33;
  Vec3 elbow_hint = Vec3(0.0, 1.0, -0.5);
  StiffnessModelParams model;

  void validate() const;
};

inline constexpr const char* kSynthGeneratorVersion = "synth-hvs-1";

// The hand travels |d_h| straight down from hand_start. Activation is set
// so that the z stiffness follows a smoothstep from k_start to k_end.
std::vector<DemoSample> synth_demonstrations(const SynthDemoParams& params,
                                             int n_demos, std::uint64_t seed);

// Arm triangle used by the generator at movement fraction s in [0, 1].
ArmTriangle synth_arm_pose(const SynthDemoParams& params, double s);
double synth_target_stiffness(const SynthDemoParams& params, double s);

MatX demos_to_matrix(const std::vector<DemoSample>& demos);

StiffnessProfile train_profile(const std::vector<DemoSample>& demos,
                               const GmmOptions& options = {},
                               double d_h = kHumanMovementLength);

// Settings of the bundled profile: four demonstrations with mild
// activation and distance jitter.
inline constexpr int kBundledDemoCount = 4;
inline constexpr std::uint64_t kBundledSeed = 1;
SynthDemoParams bundled_synth_params();

// Generator plus training; the profile records the generator version.
StiffnessProfile train_synthetic_profile(const SynthDemoParams& params, int n_demos,
                                         const GmmOptions& options = {});

void write_demos_csv(const std::string& path, const std::vector<DemoSample>& demos);
std::vector<DemoSample> read_demos_csv(const std::string& path);

std::string profile_to_json(const StiffnessProfile& profile);
StiffnessProfile profile_from_json(const std::string& text);
StiffnessProfile load_profile(const std::string& path);
void save_profile(const std::string& path, const StiffnessProfile& profile);

std::string default_profile_path();

}  // namespace catchsim
