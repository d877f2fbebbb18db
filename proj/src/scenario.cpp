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

#include "catchsim/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "catchsim/impact.hpp"

namespace catchsim {

namespace fs = std::filesystem;

namespace {

struct Tag {
  Strategy s;
  const char* name;
};

constexpr Tag kTags[] = {
    {Strategy::kFpKl, "FP-KL"},   {Strategy::kFpKh, "FP-KH"},
    {Strategy::kVmKl, "VM-KL"},   {Strategy::kVmKh, "VM-KH"},
    {Strategy::kVmSic, "VM-SIC"}, {Strategy::kVmVic, "VM-VIC"},
    {Strategy::kVmVicDim, "VM-VIC-DIM"},
};

// Reader for one JSON object that remembers which keys were consumed so
// that typos are reported instead of silently ignored.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ParseError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }
  std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }
  const json& node(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) {
      throw ParseError("missing required field '" + path(key) + "'");
    }
    return j_.at(key);
  }

  void num(const std::string& key, double* out) {
    if (!has(key)) return;
    *out = number(j_.at(key), path(key));
  }
  void integer(const std::string& key, int* out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ParseError(path(key) + ": expected an integer");
    *out = v.get<int>();
  }
  void seed(const std::string& key, std::uint64_t* out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ParseError(path(key) + ": expected a non-negative integer");
    }
    *out = v.get<std::uint64_t>();
  }
  void flag(const std::string& key, bool* out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ParseError(path(key) + ": expected true or false");
    *out = v.get<bool>();
  }
  void text(const std::string& key, std::string* out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ParseError(path(key) + ": expected a string");
    *out = v.get<std::string>();
  }
  void vec3(const std::string& key, Vec3* out) {
    if (!has(key)) return;
    *out = json_vec3(j_.at(key), path(key));
  }
  void vecx(const std::string& key, VecX* out) {
    if (!has(key)) return;
    *out = json_vecx(j_.at(key), path(key));
  }
  Fields sub(const std::string& key) { return Fields(node(key), path(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!used_.count(key)) throw ParseError(path(key) + ": unknown field");
    }
  }

  static double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(where + ": must be finite");
    return x;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(name) + ": must be > 0");
  }
}

bool multiple_of(double period, double base) {
  const double r = period / base;
  return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r) && r >= 1.0 - 1e-12;
}

json load_with_includes(const fs::path& path, std::vector<fs::path>& stack) {
  const fs::path canon = fs::weakly_canonical(path);
  for (const auto& p : stack) {
    if (p == canon) throw ParseError(path.string() + ": include cycle");
  }
  stack.push_back(canon);
  json j;
  try {
    j = json::parse(read_text_file(path.string()));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  json merged = json::object();
  if (j.contains("include")) {
    json inc = j.at("include");
    if (inc.is_string()) inc = json::array({inc});
    if (!inc.is_array()) throw ParseError(path.string() + ": include: expected a string or list");
    for (const auto& item : inc) {
      if (!item.is_string()) throw ParseError(path.string() + ": include: expected strings");
      fs::path child = item.get<std::string>();
      if (child.is_relative()) child = path.parent_path() / child;
      merged.merge_patch(load_with_includes(child, stack));
    }
    j.erase("include");
  }
  merged.merge_patch(j);
  stack.pop_back();
  return merged;
}

std::string resolve(const std::string& p, const std::string& base_dir) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

const char* to_string(Strategy s) {
  for (const auto& t : kTags) {
    if (t.s == s) return t.name;
  }
  return "?";
}

Strategy parse_strategy(const std::string& tag) {
  for (const auto& t : kTags) {
    if (tag == t.name) return t.s;
  }
  throw ParseError("strategy: unknown tag '" + tag +
                   "' (FP-KL, FP-KH, VM-KL, VM-KH, VM-SIC, VM-VIC, VM-VIC-DIM)");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> v = [] {
    std::vector<Strategy> out;
    for (const auto& t : kTags) out.push_back(t.s);
    return out;
  }();
  return v;
}

bool velocity_matching(Strategy s) {
  return s != Strategy::kFpKl && s != Strategy::kFpKh;
}
bool variable_impedance(Strategy s) {
  return s == Strategy::kVmVic || s == Strategy::kVmVicDim;
}
bool dim_enabled(Strategy s) { return s == Strategy::kVmVicDim; }

void ContactConfig::validate() const {
  if (!(e > 0.0 && e < 1.0)) throw InvalidArgument("contact.e: must be in (0, 1)");
  positive(k_c, "contact.k_c");
  if (!std::isfinite(d_c)) throw InvalidArgument("contact.d_c: must be finite");
  positive(basket_radius, "contact.basket_radius");
  if (!(well_curvature >= 0.0)) throw InvalidArgument("contact.well_curvature: must be >= 0");
  if (!(friction_mu >= 0.0)) throw InvalidArgument("contact.friction_mu: must be >= 0");
  if (!(friction_viscous >= 0.0)) {
    throw InvalidArgument("contact.friction_viscous: must be >= 0");
  }
}

double ContactConfig::damping(double object_mass) const {
  return d_c >= 0.0 ? d_c : calibrate_contact_damping(k_c, object_mass, e);
}

void RateConfig::validate() const {
  positive(dt_phys, "rates.dt_phys");
  positive(dt_ctrl, "rates.dt_ctrl");
  positive(dt_plan, "rates.dt_plan");
  positive(dt_meas, "rates.dt_meas");
  if (!multiple_of(dt_ctrl, dt_phys)) {
    throw InvalidArgument("rates.dt_ctrl: must be a multiple of dt_phys");
  }
  if (!multiple_of(dt_plan, dt_ctrl)) {
    throw InvalidArgument("rates.dt_plan: must be a multiple of dt_ctrl");
  }
  if (!multiple_of(dt_meas, dt_phys)) {
    throw InvalidArgument("rates.dt_meas: must be a multiple of dt_phys");
  }
}

void EstimatorSettings::validate() const {
  if (!(noise_std >= 0.0)) throw InvalidArgument("estimator.noise_std: must be >= 0");
  positive(process_noise, "estimator.process_noise");
  if (min_updates < 2) throw InvalidArgument("estimator.min_updates: must be >= 2");
}

void GainSettings::validate(int n) const {
  positive(K_H, "gains.K_H");
  positive(K_L, "gains.K_L");
  positive(K_ang, "gains.K_ang");
  positive(K_v, "gains.K_v");
  if (K_qp.size() != n) throw InvalidArgument("gains.K_qp: expected one entry per joint");
  if (K_qd.size() != n) throw InvalidArgument("gains.K_qd: expected one entry per joint");
  if ((K_qp.array() < 0.0).any()) throw InvalidArgument("gains.K_qp: must be >= 0");
  if ((K_qd.array() < 0.0).any()) throw InvalidArgument("gains.K_qd: must be >= 0");
}

void PlantSettings::validate(int n) const {
  if (armature.size() != 0 && armature.size() != n) {
    throw InvalidArgument("plant.armature: expected one entry per joint");
  }
  if (viscous_friction.size() != 0 && viscous_friction.size() != n) {
    throw InvalidArgument("plant.viscous_friction: expected one entry per joint");
  }
  if ((armature.array() < 0.0).any()) throw InvalidArgument("plant.armature: must be >= 0");
  if ((viscous_friction.array() < 0.0).any()) {
    throw InvalidArgument("plant.viscous_friction: must be >= 0");
  }
}

VecX PlantSettings::armature_or_default(int n) const {
  return armature.size() == n ? armature : VecX::Constant(n, kDefaultArmature);
}

VecX PlantSettings::friction_or_default(int n) const {
  return viscous_friction.size() == n ? viscous_friction : VecX::Zero(n);
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw InvalidArgument("name: must not be empty");
  if (q0.size() == 0) throw InvalidArgument("q0: missing");
  if (!object_position.allFinite() || !object_velocity.allFinite()) {
    throw InvalidArgument("object: non-finite initial state");
  }
  positive(object_mass, "object.mass");
  positive(gravity, "gravity");
  if (!std::isfinite(catch_plane_z)) throw InvalidArgument("catch_plane_z: must be finite");
  if (!(object_position.z() > catch_plane_z)) {
    throw InvalidArgument("object.position: must start above the catch plane");
  }
  contact.validate();
  plant.validate(static_cast<int>(q0.size()));
  rates.validate();
  estimator.validate();
  limits.validate();
  gains.validate(static_cast<int>(q0.size()));
  positive(F_th, "F_th");
  if (d_lim >= 0.0) positive(d_lim, "d_lim");
  if (dt_poc >= 0.0) positive(dt_poc, "dt_poc");
  if (!(scaling.K_d_max > 0.0 && scaling.K_p_max > 0.0 && scaling.epsilon > 0.0 &&
        scaling.epsilon <= 1.0)) {
    throw InvalidArgument("poc_scaling: K_d_max, K_p_max > 0 and epsilon in (0, 1]");
  }
  positive(settle_window, "settle_window");
  positive(steady_tolerance, "steady_tolerance");
  positive(t_max, "t_max");
  positive(lock_hold, "lock_hold");
}

PocDefaults ScenarioConfig::poc_defaults() const {
  PocDefaults d = planar ? kPocMultiAxis : kPocSingleAxis;
  if (d_lim > 0.0) d.d_lim = d_lim;
  if (dt_poc > 0.0) d.dt_poc = dt_poc;
  return d;
}

json load_scenario_json(const std::string& path) {
  std::vector<fs::path> stack;
  return load_with_includes(fs::path(path), stack);
}

ScenarioConfig scenario_from_json(const json& j, const std::string& base_dir) {
  ScenarioConfig c;
  Fields f(j, "");
  if (f.has("format_version")) {
    const json& v = j.at("format_version");
    if (!v.is_number_integer() || v.get<int>() != 1) {
      throw ParseError("format_version: unsupported version");
    }
  }
  {
    const json& nm = f.node("name");
    if (!nm.is_string()) throw ParseError("name: expected a string");
    c.name = nm.get<std::string>();
  }
  {
    const json& s = f.node("strategy");
    if (!s.is_string()) throw ParseError("strategy: expected a string");
    c.strategy = parse_strategy(s.get<std::string>());
  }
  f.text("model", &c.model_path);
  f.text("profile", &c.profile_path);
  c.model_path = resolve(c.model_path, base_dir);
  c.profile_path = resolve(c.profile_path, base_dir);
  c.q0 = json_vecx(f.node("q0"), "q0");
  {
    Fields o = f.sub("object");
    c.object_position = json_vec3(o.node("position"), "object.position");
    c.object_velocity = json_vec3(o.node("velocity"), "object.velocity");
    o.num("mass", &c.object_mass);
    o.finish();
  }
  c.catch_plane_z = Fields::number(f.node("catch_plane_z"), "catch_plane_z");
  f.flag("planar", &c.planar);
  f.num("gravity", &c.gravity);
  if (f.has("contact")) {
    Fields s = f.sub("contact");
    s.num("e", &c.contact.e);
    s.num("k_c", &c.contact.k_c);
    s.num("d_c", &c.contact.d_c);
    s.num("basket_radius", &c.contact.basket_radius);
    s.num("well_curvature", &c.contact.well_curvature);
    s.num("friction_mu", &c.contact.friction_mu);
    s.num("friction_viscous", &c.contact.friction_viscous);
    s.finish();
  }
  if (f.has("plant")) {
    Fields s = f.sub("plant");
    s.vecx("armature", &c.plant.armature);
    s.vecx("viscous_friction", &c.plant.viscous_friction);
    s.finish();
  }
  if (f.has("rates")) {
    Fields s = f.sub("rates");
    s.num("dt_phys", &c.rates.dt_phys);
    s.num("dt_ctrl", &c.rates.dt_ctrl);
    s.num("dt_plan", &c.rates.dt_plan);
    s.num("dt_meas", &c.rates.dt_meas);
    s.finish();
  }
  if (f.has("estimator")) {
    Fields s = f.sub("estimator");
    s.num("noise_std", &c.estimator.noise_std);
    s.num("process_noise", &c.estimator.process_noise);
    s.integer("min_updates", &c.estimator.min_updates);
    s.seed("seed", &c.estimator.seed);
    s.finish();
  }
  if (f.has("planner")) {
    Fields s = f.sub("planner");
    for (const char* key : {"x_min", "x_max"}) {
      if (!s.has(key)) continue;
      const VecX v = json_vecx(j.at("planner").at(key), s.path(key));
      if (v.size() != 6) throw ParseError(s.path(key) + ": expected 6 entries");
      (std::string(key) == "x_min" ? c.limits.x_min : c.limits.x_max) = v;
    }
    s.num("v_lin_max", &c.limits.v_lin_max);
    s.num("v_ang_max", &c.limits.v_ang_max);
    s.num("a_lin_max", &c.limits.a_lin_max);
    s.num("a_ang_max", &c.limits.a_ang_max);
    s.finish();
  }
  {
    Fields s = f.sub("gains");
    s.num("K_H", &c.gains.K_H);
    s.num("K_L", &c.gains.K_L);
    s.num("K_ang", &c.gains.K_ang);
    s.num("K_v", &c.gains.K_v);
    c.gains.K_qp = json_vecx(s.node("K_qp"), "gains.K_qp");
    c.gains.K_qd = json_vecx(s.node("K_qd"), "gains.K_qd");
    s.finish();
  }
  f.num("F_th", &c.F_th);
  if (f.has("poc")) {
    Fields s = f.sub("poc");
    s.num("d_lim", &c.d_lim);
    s.num("dt_poc", &c.dt_poc);
    s.num("K_d_max", &c.scaling.K_d_max);
    s.num("K_p_max", &c.scaling.K_p_max);
    s.num("epsilon", &c.scaling.epsilon);
    s.finish();
  }
  f.num("settle_window", &c.settle_window);
  f.num("steady_tolerance", &c.steady_tolerance);
  f.num("t_max", &c.t_max);
  f.num("lock_hold", &c.lock_hold);
  f.flag("torque_clamp", &c.torque_clamp);
  f.flag("compare_without_dim", &c.compare_without_dim);
  f.finish();
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  const json j = load_scenario_json(path);
  return scenario_from_json(j, fs::path(path).parent_path().string());
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["format_version"] = 1;
  j["name"] = c.name;
  j["strategy"] = to_string(c.strategy);
  if (!c.model_path.empty()) j["model"] = c.model_path;
  if (!c.profile_path.empty()) j["profile"] = c.profile_path;
  j["q0"] = vec_to_json(c.q0);
  j["object"] = {{"position", vec_to_json(c.object_position)},
                 {"velocity", vec_to_json(c.object_velocity)},
                 {"mass", c.object_mass}};
  j["catch_plane_z"] = c.catch_plane_z;
  j["planar"] = c.planar;
  j["gravity"] = c.gravity;
  j["contact"] = {{"e", c.contact.e},
                  {"k_c", c.contact.k_c},
                  {"d_c", c.contact.d_c},
                  {"basket_radius", c.contact.basket_radius},
                  {"well_curvature", c.contact.well_curvature},
                  {"friction_mu", c.contact.friction_mu},
                  {"friction_viscous", c.contact.friction_viscous}};
  j["plant"] = json::object();
  if (c.plant.armature.size() > 0) j["plant"]["armature"] = vec_to_json(c.plant.armature);
  if (c.plant.viscous_friction.size() > 0) {
    j["plant"]["viscous_friction"] = vec_to_json(c.plant.viscous_friction);
  }
  j["rates"] = {{"dt_phys", c.rates.dt_phys},
                {"dt_ctrl", c.rates.dt_ctrl},
                {"dt_plan", c.rates.dt_plan},
                {"dt_meas", c.rates.dt_meas}};
  j["estimator"] = {{"noise_std", c.estimator.noise_std},
                    {"process_noise", c.estimator.process_noise},
                    {"min_updates", c.estimator.min_updates},
                    {"seed", c.estimator.seed}};
  j["planner"] = {{"x_min", vec_to_json(c.limits.x_min)},
                  {"x_max", vec_to_json(c.limits.x_max)},
                  {"v_lin_max", c.limits.v_lin_max},
                  {"v_ang_max", c.limits.v_ang_max},
                  {"a_lin_max", c.limits.a_lin_max},
                  {"a_ang_max", c.limits.a_ang_max}};
  j["gains"] = {{"K_H", c.gains.K_H},   {"K_L", c.gains.K_L},
                {"K_ang", c.gains.K_ang}, {"K_v", c.gains.K_v},
                {"K_qp", vec_to_json(c.gains.K_qp)},
                {"K_qd", vec_to_json(c.gains.K_qd)}};
  j["F_th"] = c.F_th;
  j["poc"] = {{"d_lim", c.d_lim},
              {"dt_poc", c.dt_poc},
              {"K_d_max", c.scaling.K_d_max},
              {"K_p_max", c.scaling.K_p_max},
              {"epsilon", c.scaling.epsilon}};
  j["settle_window"] = c.settle_window;
  j["steady_tolerance"] = c.steady_tolerance;
  j["t_max"] = c.t_max;
  j["lock_hold"] = c.lock_hold;
  j["torque_clamp"] = c.torque_clamp;
  j["compare_without_dim"] = c.compare_without_dim;
  return j;
}

std::string default_scenario_dir() {
  return std::string(CATCHSIM_DATA_DIR) + "/scenarios";
}

}  // namespace catchsim
