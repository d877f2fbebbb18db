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

#include "catchsim/arm_model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "catchsim/json_util.hpp"

namespace catchsim {

namespace {

constexpr double kPointInertia = 1e-9;

void check_spd(const Mat3& m, const std::string& what) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvalidArgument(what + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument(what + " is not positive definite");
  }
}

}  // namespace

void ArmModel::validate() const {
  const int n = n_dof();
  if (n < 1) throw InvalidArgument("links: at least one link required");
  auto check_len = [n](const VecX& v, const char* name) {
    if (v.size() != n) {
      throw InvalidArgument(std::string(name) + ": expected " +
                            std::to_string(n) + " entries");
    }
  };
  check_len(q_min, "q_min");
  check_len(q_max, "q_max");
  check_len(dq_max, "dq_max");
  check_len(ddq_max, "ddq_max");
  check_len(tau_lim, "tau_lim");
  for (int i = 0; i < n; ++i) {
    const std::string tag = "links[" + std::to_string(i) + "]";
    if (!(links[i].mass > 0.0)) throw InvalidArgument(tag + ".mass must be > 0");
    check_spd(links[i].inertia, tag + ".inertia");
    if (!(q_min[i] < q_max[i])) {
      throw InvalidArgument(tag + ": q_min must be < q_max");
    }
    if (!(dq_max[i] > 0.0)) throw InvalidArgument(tag + ".dq_max must be > 0");
    if (!(ddq_max[i] > 0.0)) {
      throw InvalidArgument(tag + ".ddq_max must be > 0");
    }
    if (!(tau_lim[i] > 0.0)) throw InvalidArgument(tag + ".tau_lim must be > 0");
  }
  if (tool_mass < 0.0) throw InvalidArgument("tool.mass must be >= 0");
}

std::vector<LinkParams> ArmModel::lumped_links() const {
  std::vector<LinkParams> out = links;
  if (tool_mass <= 0.0 || out.empty()) return out;
  LinkParams& last = out.back();
  const double m1 = last.mass;
  const double m2 = tool_mass;
  const double m = m1 + m2;
  const Vec3 c = (m1 * last.com + m2 * tool_com) / m;
  // Parallel-axis shift of both bodies to the combined COM.
  auto shift = [](double mass, const Vec3& r) {
    return Mat3(mass * (r.squaredNorm() * Mat3::Identity() - r * r.transpose()));
  };
  last.inertia = last.inertia + shift(m1, last.com - c) + tool_inertia +
                 shift(m2, tool_com - c);
  last.com = c;
  last.mass = m;
  return out;
}

ArmModel parse_arm_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("arm model: ") + e.what());
  }
  const int version = json_required<int>(j, "format_version", "arm model");
  if (version != kArmModelFormatVersion) {
    throw ParseError("arm model: unsupported format_version " +
                     std::to_string(version));
  }
  ArmModel m;
  m.name = j.value("name", std::string("arm"));
  if (j.contains("gravity")) m.gravity = json_vec3(j.at("gravity"), "gravity");
  const json& links = json_required_node(j, "links", "arm model");
  const int n = static_cast<int>(links.size());
  m.q_min.resize(n);
  m.q_max.resize(n);
  m.dq_max.resize(n);
  m.ddq_max.resize(n);
  m.tau_lim.resize(n);
  for (int i = 0; i < n; ++i) {
    const json& l = links[i];
    const std::string tag = "links[" + std::to_string(i) + "]";
    LinkParams p;
    p.a = json_required<double>(l, "a", tag);
    p.alpha = json_required<double>(l, "alpha", tag);
    p.d = json_required<double>(l, "d", tag);
    p.theta_offset = l.value("theta_offset", 0.0);
    p.mass = json_required<double>(l, "mass", tag);
    p.com = json_vec3(json_required_node(l, "com", tag), tag + ".com");
    p.inertia = json_mat3(json_required_node(l, "inertia", tag),
                          tag + ".inertia");
    m.q_min[i] = json_required<double>(l, "q_min", tag);
    m.q_max[i] = json_required<double>(l, "q_max", tag);
    m.dq_max[i] = json_required<double>(l, "dq_max", tag);
    m.ddq_max[i] = json_required<double>(l, "ddq_max", tag);
    m.tau_lim[i] = json_required<double>(l, "tau_lim", tag);
    m.links.push_back(p);
  }
  if (j.contains("tool")) {
    const json& t = j.at("tool");
    Vec3 tr = Vec3::Zero();
    if (t.contains("translation")) tr = json_vec3(t.at("translation"), "tool");
    Quat q = Quat::Identity();
    if (t.contains("quaternion_wxyz")) {
      q = json_quat_wxyz(t.at("quaternion_wxyz"), "tool.quaternion_wxyz");
    }
    m.tool = Eigen::Isometry3d::Identity();
    m.tool.translate(tr);
    m.tool.rotate(q);
    m.tool_mass = t.value("mass", 0.0);
    if (t.contains("com")) m.tool_com = json_vec3(t.at("com"), "tool.com");
    if (t.contains("inertia")) {
      m.tool_inertia = json_mat3(t.at("inertia"), "tool.inertia");
    }
  }
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    m.reference_zero_position =
        r.value("zero_q_tool_position", std::vector<double>{});
    m.reference_zero_quaternion =
        r.value("zero_q_tool_quaternion_wxyz", std::vector<double>{});
  }
  m.validate();
  return m;
}

ArmModel load_arm_model(const std::string& path) {
  return parse_arm_model(read_text_file(path));
}

std::string serialize_arm_model(const ArmModel& m) {
  json j;
  j["format_version"] = kArmModelFormatVersion;
  j["name"] = m.name;
  j["gravity"] = vec_to_json(m.gravity);
  j["links"] = json::array();
  for (int i = 0; i < m.n_dof(); ++i) {
    const LinkParams& p = m.links[i];
    json l;
    l["a"] = p.a;
    l["alpha"] = p.alpha;
    l["d"] = p.d;
    l["theta_offset"] = p.theta_offset;
    l["mass"] = p.mass;
    l["com"] = vec_to_json(p.com);
    l["inertia"] = mat_to_json(p.inertia);
    l["q_min"] = m.q_min[i];
    l["q_max"] = m.q_max[i];
    l["dq_max"] = m.dq_max[i];
    l["ddq_max"] = m.ddq_max[i];
    l["tau_lim"] = m.tau_lim[i];
    j["links"].push_back(l);
  }
  const Quat q(m.tool.rotation());
  j["tool"] = {{"translation", vec_to_json(Vec3(m.tool.translation()))},
               {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}},
               {"mass", m.tool_mass},
               {"com", vec_to_json(m.tool_com)},
               {"inertia", mat_to_json(m.tool_inertia)}};
  if (!m.reference_zero_position.empty()) {
    j["reference"] = {
        {"zero_q_tool_position", m.reference_zero_position},
        {"zero_q_tool_quaternion_wxyz", m.reference_zero_quaternion}};
  }
  return j.dump(2) + "\n";
}

void save_arm_model(const ArmModel& model, const std::string& path) {
  write_text_file(path, serialize_arm_model(model));
}

std::string default_arm_model_path() {
  return std::string(CATCHSIM_DATA_DIR) + "/models/panda_like.json";
}

ArmModel default_arm_model() { return load_arm_model(default_arm_model_path()); }

ArmModel make_planar_arm(const std::vector<double>& lengths,
                         const std::vector<double>& tip_masses,
                         double gravity) {
  if (lengths.empty() || lengths.size() != tip_masses.size()) {
    throw InvalidArgument("make_planar_arm: lengths/masses mismatch");
  }
  const int n = static_cast<int>(lengths.size());
  ArmModel m;
  m.name = "planar_" + std::to_string(n);
  m.gravity = Vec3(0.0, -gravity, 0.0);
  for (int i = 0; i < n; ++i) {
    LinkParams p;
    p.a = i == 0 ? 0.0 : lengths[i - 1];
    p.mass = tip_masses[i];
    p.com = Vec3(lengths[i], 0.0, 0.0);
    p.inertia = kPointInertia * Mat3::Identity();
    m.links.push_back(p);
  }
  m.q_min = VecX::Constant(n, -2.0 * M_PI);
  m.q_max = VecX::Constant(n, 2.0 * M_PI);
  m.dq_max = VecX::Constant(n, 10.0);
  m.ddq_max = VecX::Constant(n, 100.0);
  m.tau_lim = VecX::Constant(n, 100.0);
  m.tool = Eigen::Isometry3d::Identity();
  m.tool.translate(Vec3(lengths.back(), 0.0, 0.0));
  m.validate();
  return m;
}

}  // namespace catchsim
