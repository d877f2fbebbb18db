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

#include "catchsim/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>

#include "catchsim/json_util.hpp"

namespace catchsim {

namespace {

void check_psd(const MatX& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + " not square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.norm())) {
    throw InvalidArgument(std::string(what) + " not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(m);
  if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + m.norm())) {
    throw InvalidArgument(std::string(what) + " not positive semidefinite");
  }
}

}  // namespace

void KalmanConfig::validate() const {
  const Eigen::Index n = F.rows();
  require_size(F.cols(), n, "KalmanConfig.F cols");
  require_size(G.rows(), n, "KalmanConfig.G rows");
  require_size(u.size(), G.cols(), "KalmanConfig.u");
  require_size(H.cols(), n, "KalmanConfig.H cols");
  require_size(Q.rows(), n, "KalmanConfig.Q");
  require_size(R.rows(), H.rows(), "KalmanConfig.R");
  require_size(x0.size(), n, "KalmanConfig.x0");
  require_size(P0.rows(), n, "KalmanConfig.P0");
  check_psd(Q, "KalmanConfig.Q");
  check_psd(R, "KalmanConfig.R");
  check_psd(P0, "KalmanConfig.P0");
  if (!(dt > 0.0)) throw InvalidArgument("KalmanConfig.dt must be > 0");
}

KalmanConfig kalman_config_1d(double dt, double g, double q, double r_std) {
  KalmanConfig c;
  c.dt = dt;
  c.F.resize(2, 2);
  c.F << 1.0, dt, 0.0, 1.0;
  c.G.resize(2, 1);
  c.G << 0.5 * dt * dt, dt;
  c.H.resize(1, 2);
  c.H << 1.0, 0.0;
  c.Q = q * MatX::Identity(2, 2);
  c.R = r_std * r_std * MatX::Identity(1, 1);
  c.u = VecX::Constant(1, -g);
  c.x0.resize(2);
  c.x0 << 0.7, 0.0;
  c.P0 = MatX::Identity(2, 2);
  return c;
}

KalmanConfig kalman_config_2d(double dt, double g, double q, double r_std) {
  KalmanConfig c;
  c.dt = dt;
  c.F.resize(4, 4);
  // Last row is constant-velocity; the printed layout has zeros there.
  c.F << 1.0, dt, 0.0, 0.0,
         0.0, 1.0, 0.0, 0.0,
         0.0, 0.0, 1.0, dt,
         0.0, 0.0, 0.0, 1.0;
  c.G.resize(4, 1);
  c.G << 0.5 * dt * dt, dt, 0.0, 0.0;
  c.H.resize(2, 4);
  c.H << 1.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 1.0, 0.0;
  c.Q = q * MatX::Identity(4, 4);
  c.R = r_std * r_std * MatX::Identity(2, 2);
  c.u = VecX::Constant(1, -g);
  c.x0.resize(4);
  c.x0 << 0.3, 1.0, -1.6, 2.5;
  c.P0 = MatX::Identity(4, 4);
  return c;
}

KfStep kf_step(const VecX& x, const MatX& P, const VecX& z,
               const KalmanConfig& c) {
  require_size(x.size(), c.F.rows(), "kf_step: x");
  require_size(P.rows(), c.F.rows(), "kf_step: P");
  require_size(z.size(), c.H.rows(), "kf_step: z");
  const VecX xp = c.F * x + c.G * c.u;
  const MatX Pp = c.F * P * c.F.transpose() + c.Q;
  KfStep out;
  out.innovation = z - c.H * xp;
  const MatX S = c.H * Pp * c.H.transpose() + c.R;
  const Eigen::LDLT<MatX> ldlt(S);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw SingularError("kf_step: innovation covariance not invertible",
                        std::numeric_limits<double>::infinity());
  }
  const MatX K = ldlt.solve(c.H * Pp).transpose();
  out.x = xp + K * out.innovation;
  // Joseph form keeps P PSD.
  const MatX IKH = MatX::Identity(x.size(), x.size()) - K * c.H;
  out.P = IKH * Pp * IKH.transpose() + K * c.R * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

CatchPrediction predict_catch(const VecX& state, double catch_plane_z,
                              double g, double now, const Vec3& lateral) {
  if (state.size() != 2 && state.size() != 4) {
    throw DimensionError("predict_catch: state must have 2 or 4 entries");
  }
  CatchPrediction p;
  const double z = state[0], vz = state[1];
  double y = lateral.y(), vy = 0.0;
  if (state.size() == 4) {
    y = state[2];
    vy = state[3];
  }
  const double disc = vz * vz + 2.0 * g * (z - catch_plane_z);
  if (disc < 0.0 || !(g > 0.0)) return p;
  // Larger root of z + vz t - g t^2 / 2 = plane: the descending crossing.
  const double t = (vz + std::sqrt(disc)) / g;
  if (t < 0.0) return p;
  p.valid = true;
  p.t_c = now + t;
  p.x_at_tc = Vec3(lateral.x(), y + vy * t, z + vz * t - 0.5 * g * t * t);
  p.v_at_tc = Vec3(0.0, vy, vz - g * t);
  return p;
}

MeasurementNoise::MeasurementNoise(double noise_std, std::uint64_t seed)
    : std_(noise_std), rng_(seed) {
  if (!(noise_std >= 0.0)) throw InvalidArgument("noise_std must be >= 0");
}

Measurement MeasurementNoise::sample(double t, const Vec3& truth) {
  Measurement m;
  m.t = t;
  m.y = truth.y();
  m.z = truth.z();
  if (std_ > 0.0) {
    m.y += std_ * normal_(rng_);
    m.z += std_ * normal_(rng_);
  }
  return m;
}

std::vector<Measurement> synth_measurements(
    const std::function<Vec3(double)>& truth, double t0, double t_end,
    double noise_std, double rate, std::uint64_t seed) {
  if (!(rate > 0.0)) throw InvalidArgument("synth_measurements: rate must be > 0");
  MeasurementNoise noise(noise_std, seed);
  std::vector<Measurement> out;
  for (long k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    if (t >= t_end) break;
    out.push_back(noise.sample(t, truth(t)));
  }
  return out;
}

void write_measurements_csv(const std::string& path,
                            const std::vector<Measurement>& m) {
  std::ostringstream os;
  os.precision(17);
  os << "time_s,y_m,z_m\n";
  for (const Measurement& s : m) os << s.t << ',' << s.y << ',' << s.z << '\n';
  write_text_file(path, os.str());
}

std::vector<Measurement> read_measurements_csv(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line) || line.rfind("time_s,y_m,z_m", 0) != 0) {
    throw ParseError(path + ": expected header time_s,y_m,z_m");
  }
  std::vector<Measurement> out;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    Measurement m;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> m.t >> c1 >> m.y >> c2 >> m.z) || c1 != ',' || c2 != ',') {
      throw ParseError(path + ": malformed row " + std::to_string(row));
    }
    out.push_back(m);
  }
  return out;
}

ObjectTracker::ObjectTracker(KalmanConfig config, bool planar,
                             const Vec3& lateral)
    : config_(std::move(config)), planar_(planar), lateral_(lateral) {
  config_.validate();
  if (config_.F.rows() != (planar_ ? 4 : 2)) {
    throw DimensionError("ObjectTracker: config does not match layout");
  }
  x_ = config_.x0;
  P_ = config_.P0;
}

VecX ObjectTracker::update(const Measurement& m) {
  VecX z(planar_ ? 2 : 1);
  z[0] = m.z;
  if (planar_) z[1] = m.y;
  KfStep s = kf_step(x_, P_, z, config_);
  x_ = std::move(s.x);
  P_ = std::move(s.P);
  t_ = m.t;
  ++updates_;
  return s.innovation;
}

CatchPrediction ObjectTracker::predict(double catch_plane_z, double g,
                                       double now) const {
  // Propagate the estimate from the last update time to now.
  const double dt = now - t_;
  VecX s = x_;
  s[0] = x_[0] + x_[1] * dt - 0.5 * g * dt * dt;
  s[1] = x_[1] - g * dt;
  if (planar_) s[2] = x_[2] + x_[3] * dt;
  return predict_catch(s, catch_plane_z, g, now, lateral_);
}

}  // namespace catchsim
