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

// Linear Kalman filter for a ballistic object with gravity as the control
// input, and catch-plane crossing prediction.
//
// State layouts: single-axis [z, vz]; planar [z, vz, y, vy]. The control
// vector is the signed vertical gravity acceleration, [-g].

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "catchsim/common.hpp"

namespace catchsim {

struct KalmanConfig {
  MatX F, G, H, Q, R;
  VecX u;  // control input
  VecX x0;
  MatX P0;
  double dt = 0.0;

  void validate() const;
};

inline constexpr double kDefaultProcessNoise = 1e-6;
inline constexpr double kDefaultMeasurementStd = 2.5e-3;  // m

KalmanConfig kalman_config_1d(double dt, double g = 9.81,
                              double q = kDefaultProcessNoise,
                              double r_std = kDefaultMeasurementStd);
KalmanConfig kalman_config_2d(double dt, double g = 9.81,
                              double q = kDefaultProcessNoise,
                              double r_std = kDefaultMeasurementStd);

struct KfStep {
  VecX x;
  MatX P;
  VecX innovation;
};

// Predict with the control input, then update with z.
KfStep kf_step(const VecX& x, const MatX& P, const VecX& z,
               const KalmanConfig& config);

struct CatchPrediction {
  double t_c = 0.0;  // absolute time
  Vec3 x_at_tc = Vec3::Zero();
  Vec3 v_at_tc = Vec3::Zero();
  bool valid = false;
};

// Descending crossing of z = catch_plane_z. `state` is a 1-D or 2-D filter
// state; coordinates not in the state are taken from `lateral` (x, and y
// for the single-axis layout) and assumed stationary.
CatchPrediction predict_catch(const VecX& state, double catch_plane_z,
                              double g, double now,
                              const Vec3& lateral = Vec3::Zero());

struct Measurement {
  double t = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Gaussian position noise on y and z, deterministic for a given seed.
class MeasurementNoise {
 public:
  MeasurementNoise(double noise_std, std::uint64_t seed);
  Measurement sample(double t, const Vec3& truth);

 private:
  double std_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Samples truth(t) at t0 + k / rate for all sample times < t_end.
std::vector<Measurement> synth_measurements(
    const std::function<Vec3(double)>& truth, double t0, double t_end,
    double noise_std, double rate, std::uint64_t seed);

void write_measurements_csv(const std::string& path,
                            const std::vector<Measurement>& m);
std::vector<Measurement> read_measurements_csv(const std::string& path);

// Filter plus the bookkeeping to turn measurements into catch predictions.
class ObjectTracker {
 public:
  // planar selects the 2-D layout. lateral supplies unobserved coordinates.
  ObjectTracker(KalmanConfig config, bool planar, const Vec3& lateral);

  VecX update(const Measurement& m);
  CatchPrediction predict(double catch_plane_z, double g, double now) const;
  int updates() const { return updates_; }
  const VecX& state() const { return x_; }
  const MatX& covariance() const { return P_; }
  // Last update time; the filter state refers to this instant.
  double time() const { return t_; }

 private:
  KalmanConfig config_;
  bool planar_;
  Vec3 lateral_;
  VecX x_;
  MatX P_;
  double t_ = 0.0;
  int updates_ = 0;
};

}  // namespace catchsim
