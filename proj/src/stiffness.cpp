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

#include "catchsim/stiffness.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "catchsim/json_util.hpp"

namespace catchsim {

StiffnessEllipsoid estimate_stiffness(const ArmTriangle& tri,
                                      const StiffnessModelParams& params) {
  if (!(tri.activation >= 0.0 && tri.activation <= 1.0)) {
    throw InvalidArgument("estimate_stiffness: activation must be in [0, 1]");
  }
  if (!tri.shoulder.allFinite() || !tri.elbow.allFinite() || !tri.hand.allFinite()) {
    throw InvalidArgument("estimate_stiffness: non-finite arm point");
  }
  const Vec3 l = tri.hand - tri.shoulder;
  const Vec3 r = tri.elbow - tri.shoulder;
  const Vec3 n = r.cross(l);
  if (0.5 * n.norm() <= 1e-9) {
    throw InvalidArgument("estimate_stiffness: arm triangle is collinear");
  }
  const Vec3 m = n.cross(l);

  StiffnessEllipsoid out;
  out.params = params;
  out.V.col(0) = l.normalized();
  out.V.col(1) = m.normalized();
  out.V.col(2) = n.normalized();
  out.d1 = l.norm();
  // Elbow distance from the major axis; r . m_hat itself is negative
  // because m points away from the elbow side.
  out.d2 = std::abs(r.dot(out.V.col(1)));
  const double r2 = params.alpha1 / out.d1;
  const double r3 = params.alpha2 * out.d2;
  if (!(r2 > 0.0 && r3 > 0.0)) {
    throw InvalidArgument("estimate_stiffness: model constants must give positive axes");
  }
  out.a_cc = params.a_cc(tri.activation);
  const double norm = std::cbrt(r2 * r3);
  out.D = (out.a_cc / norm) * Vec3(1.0, r2, r3).asDiagonal();
  out.K = out.V * out.D * out.V.transpose();
  out.K = 0.5 * (out.K + out.K.transpose());
  return out;
}

Vec6 chol_encode(const Mat3& K) {
  if (!K.allFinite()) throw InvalidArgument("chol_encode: non-finite matrix");
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + K.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("chol_encode: matrix not symmetric");
  }
  Eigen::LLT<Mat3> llt(K);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("chol_encode: matrix not positive definite");
  }
  const Mat3 u = llt.matrixU();
  Vec6 v;
  v << u(0, 0), u(0, 1), u(0, 2), u(1, 1), u(1, 2), u(2, 2);
  return v;
}

Mat3 chol_upper(const Vec6& l) {
  Mat3 u;
  u << l(0), l(1), l(2),
       0.0, l(3), l(4),
       0.0, 0.0, l(5);
  return u;
}

Mat3 chol_decode(const Vec6& l) {
  if (!l.allFinite()) throw InvalidArgument("chol_decode: non-finite vector");
  if (l(0) == 0.0 || l(3) == 0.0 || l(5) == 0.0) {
    throw InvalidArgument("chol_decode: zero diagonal entry");
  }
  const Mat3 u = chol_upper(l);
  return u.transpose() * u;
}

StiffnessQuery gmr_predict(const StiffnessProfile& profile, double delta_d) {
  VecX in(1);
  in << delta_d;
  const GmrOutput g = gmr(profile.gmm, in);
  StiffnessQuery q;
  q.chol = g.mean;
  q.K = chol_decode(q.chol);
  q.extrapolated = g.extrapolated;
  return q;
}

void SynthDemoParams::validate() const {
  if (!(d_h < 0.0)) throw InvalidArgument("SynthDemoParams.d_h must be < 0");
  if (!(k_start > 0.0 && k_end > 0.0)) {
    throw InvalidArgument("SynthDemoParams: stiffness targets must be > 0");
  }
  if (samples_per_demo < 2) throw InvalidArgument("SynthDemoParams.samples_per_demo must be >= 2");
  if (activation_noise < 0.0 || distance_noise < 0.0) {
    throw InvalidArgument("SynthDemoParams: noise must be >= 0");
  }
  if (!(upper_arm > 0.0 && forearm > 0.0)) {
    throw InvalidArgument("SynthDemoParams: segment lengths must be > 0");
  }
}

double synth_target_stiffness(const SynthDemoParams& params, double s) {
  const double h = s * s * (3.0 - 2.0 * s);
  return params.k_start + (params.k_end - params.k_start) * h;
}

ArmTriangle synth_arm_pose(const SynthDemoParams& params, double s) {
  ArmTriangle tri;
  tri.hand = params.hand_start + Vec3(0.0, 0.0, s * params.d_h);
  const double reach = tri.hand.norm();
  const double a = params.upper_arm;
  const double b = params.forearm;
  if (!(reach < a + b && reach > std::abs(a - b))) {
    throw InvalidArgument("synth_arm_pose: hand out of reach");
  }
  const Vec3 lh = tri.hand / reach;
  Vec3 w = params.elbow_hint - lh * lh.dot(params.elbow_hint);
  if (w.norm() < 1e-6) throw InvalidArgument("synth_arm_pose: elbow hint parallel to arm");
  w.normalize();
  const double c = (a * a + reach * reach - b * b) / (2.0 * a * reach);
  tri.elbow = a * (c * lh + std::sqrt(1.0 - c * c) * w);

  // K is linear in A_cc, so the activation hitting the target follows from
  // the unit-activation shape.
  const StiffnessEllipsoid base = estimate_stiffness(tri, params.model);
  const double shape_zz = base.K(2, 2) / base.a_cc;
  const double a_cc = synth_target_stiffness(params, s) / shape_zz;
  tri.activation = std::clamp((a_cc - params.model.c2) / params.model.c1, 0.0, 1.0);
  return tri;
}

std::vector<DemoSample> synth_demonstrations(const SynthDemoParams& params,
                                             int n_demos, std::uint64_t seed) {
  params.validate();
  if (n_demos < 1) throw InvalidArgument("synth_demonstrations: n_demos must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DemoSample> out;
  out.reserve(static_cast<std::size_t>(n_demos) * params.samples_per_demo);
  for (int d = 0; d < n_demos; ++d) {
    for (int i = 0; i < params.samples_per_demo; ++i) {
      const double s = static_cast<double>(i) / (params.samples_per_demo - 1);
      ArmTriangle tri = synth_arm_pose(params, s);
      const double np = normal(rng);
      const double nd = normal(rng);
      tri.activation = std::clamp(tri.activation + params.activation_noise * np, 0.0, 1.0);
      DemoSample sample;
      sample.delta_d = s * params.d_h + params.distance_noise * nd;
      sample.chol = chol_encode(estimate_stiffness(tri, params.model).K);
      out.push_back(sample);
    }
  }
  return out;
}

MatX demos_to_matrix(const std::vector<DemoSample>& demos) {
  MatX m(static_cast<Eigen::Index>(demos.size()), 7);
  for (std::size_t i = 0; i < demos.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = demos[i].delta_d;
    m.row(static_cast<Eigen::Index>(i)).tail<6>() = demos[i].chol.transpose();
  }
  return m;
}

StiffnessProfile train_profile(const std::vector<DemoSample>& demos,
                               const GmmOptions& options, double d_h) {
  if (!(d_h < 0.0)) throw InvalidArgument("train_profile: d_h must be < 0");
  GmmFit fit = train_gmm(demos_to_matrix(demos), 1, options);
  StiffnessProfile p;
  p.gmm = std::move(fit.model);
  p.d_h = d_h;
  p.log_likelihood = fit.log_likelihood;
  p.seed = options.seed;
  p.generator = "demonstrations";
  return p;
}

SynthDemoParams bundled_synth_params() {
  SynthDemoParams p;
  p.activation_noise = 0.01;
  p.distance_noise = 0.001;
  return p;
}

StiffnessProfile train_synthetic_profile(const SynthDemoParams& params, int n_demos,
                                         const GmmOptions& options) {
  StiffnessProfile p =
      train_profile(synth_demonstrations(params, n_demos, options.seed), options, params.d_h);
  p.generator = kSynthGeneratorVersion;
  return p;
}

void write_demos_csv(const std::string& path, const std::vector<DemoSample>& demos) {
  std::ostringstream os;
  os << "delta_d_m,L11,L12,L13,L22,L23,L33\n";
  char buf[64];
  for (const DemoSample& d : demos) {
    std::snprintf(buf, sizeof buf, "%.17g", d.delta_d);
    os << buf;
    for (int c = 0; c < 6; ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", d.chol(c));
      os << buf;
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<DemoSample> read_demos_csv(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line) || line.rfind("delta_d_m,L11,L12,L13,L22,L23,L33", 0) != 0) {
    throw ParseError(path + ": expected header delta_d_m,L11,L12,L13,L22,L23,L33");
  }
  std::vector<DemoSample> out;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string cell;
    double v[7];
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= 7) break;
      try {
        std::size_t used = 0;
        v[c] = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError(path + ": row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
      ++c;
    }
    if (c != 7) throw ParseError(path + ": row " + std::to_string(row) + ": expected 7 columns");
    DemoSample d;
    d.delta_d = v[0];
    for (int k = 0; k < 6; ++k) d.chol(k) = v[k + 1];
    out.push_back(d);
  }
  return out;
}

std::string profile_to_json(const StiffnessProfile& profile) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "stiffness_profile";
  j["d_h"] = profile.d_h;
  j["input"] = "delta_d_m";
  j["outputs"] = {"L11", "L12", "L13", "L22", "L23", "L33"};
  j["log_likelihood"] = profile.log_likelihood;
  j["generator"] = profile.generator;
  j["seed"] = profile.seed;
  j["gmm"] = gmm_to_json(profile.gmm);
  return j.dump(2) + "\n";
}

StiffnessProfile profile_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("profile: ") + e.what());
  }
  const std::string where = "profile";
  if (json_required<int>(j, "format_version", where) != 1) {
    throw ParseError("profile.format_version: unsupported version");
  }
  StiffnessProfile p;
  p.d_h = json_required<double>(j, "d_h", where);
  if (!(p.d_h < 0.0)) throw ParseError("profile.d_h: must be < 0");
  p.log_likelihood = j.value("log_likelihood", 0.0);
  p.generator = j.value("generator", std::string());
  p.seed = j.value("seed", std::uint64_t{0});
  p.gmm = gmm_from_json(json_required_node(j, "gmm", where), where + ".gmm");
  if (p.gmm.inputs != 1 || p.gmm.dim() != 7) {
    throw ParseError("profile.gmm: expected 1 input and 6 outputs");
  }
  return p;
}

StiffnessProfile load_profile(const std::string& path) {
  return profile_from_json(read_text_file(path));
}

void save_profile(const std::string& path, const StiffnessProfile& profile) {
  write_text_file(path, profile_to_json(profile));
}

std::string default_profile_path() {
  return std::string(CATCHSIM_DATA_DIR) + "/profiles/hvs_default.json";
}

}  // namespace catchsim
