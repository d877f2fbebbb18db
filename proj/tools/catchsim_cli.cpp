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

// catchsim command line: run, compare, train-profile, calibrate-contact.
// Talks to the simulator only through the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "catchsim/catchsim.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct CliError {
  int exit_code;
  std::string message;
};

void check(int rc, const std::string& what) {
  if (rc == CATCHSIM_OK) return;
  const int code =
      rc == CATCHSIM_E_PARSE || rc == CATCHSIM_E_INVALID_ARGUMENT ? kExitConfig : kExitFailure;
  throw CliError{code, what + ": " + catchsim_last_error()};
}

struct CString {
  char* p = nullptr;
  ~CString() { catchsim_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct ScenarioDeleter {
  void operator()(catchsim_scenario* s) const { catchsim_scenario_free(s); }
};
struct ResultDeleter {
  void operator()(catchsim_result* r) const { catchsim_result_free(r); }
};
using ScenarioPtr = std::unique_ptr<catchsim_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<catchsim_result, ResultDeleter>;

std::string sha256(const std::string& path) {
  char hex[65] = {0};
  check(catchsim_sha256_file(path.c_str(), hex), "hash " + path);
  return hex;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw CliError{kExitFailure, "cannot write " + path.string()};
}

ScenarioPtr load(const std::string& path) {
  catchsim_scenario* s = nullptr;
  check(catchsim_scenario_load(path.c_str(), &s), path);
  return ScenarioPtr(s);
}

std::uint64_t scenario_seed(const catchsim_scenario* s) {
  CString text;
  check(catchsim_scenario_to_json(s, &text.p), "scenario");
  return json::parse(text.str()).at("estimator").at("seed").get<std::uint64_t>();
}

struct RunSettings {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool deterministic = true;
  std::string dim;  // "", "on", "off"
  double k_c = 0.0;
  std::string manifest;
};

// Resolves the seed: explicit, else the scenario's (deterministic) or a
// fresh one.
std::uint64_t pick_seed(const RunSettings& rs, const catchsim_scenario* s) {
  if (rs.seed) return *rs.seed;
  if (rs.deterministic) return scenario_seed(s);
  return std::random_device{}();
}

catchsim_run_options options(const RunSettings& rs, std::uint64_t seed) {
  catchsim_run_options o;
  catchsim_run_options_init(&o);
  o.has_seed = 1;
  o.seed = seed;
  if (rs.dim == "on") o.dim = 1;
  if (rs.dim == "off") o.dim = 0;
  o.k_c = rs.k_c;
  return o;
}

ResultPtr run_one(const catchsim_scenario* s, const catchsim_run_options& o) {
  catchsim_result* r = nullptr;
  check(catchsim_run(s, &o, &r), std::string("run ") + catchsim_scenario_name(s));
  return ResultPtr(r);
}

void read_manifest(RunSettings& rs) {
  std::ifstream in(rs.manifest);
  if (!in) throw CliError{kExitConfig, "cannot open manifest " + rs.manifest};
  json m;
  try {
    in >> m;
    rs.config = m.at("config").get<std::string>();
    rs.seed = m.at("seed").get<std::uint64_t>();
    rs.dim = m.at("dim").get<std::string>();
    rs.k_c = m.at("k_c").get<double>();
    rs.deterministic = true;
  } catch (const json::exception& e) {
    throw CliError{kExitConfig, "manifest " + rs.manifest + ": " + e.what()};
  }
}

int cmd_run(RunSettings rs) {
  if (!rs.manifest.empty()) read_manifest(rs);
  if (rs.config.empty()) throw CliError{kExitConfig, "--config or --manifest is required"};
  ScenarioPtr s = load(rs.config);
  const std::uint64_t seed = pick_seed(rs, s.get());
  ResultPtr r = run_one(s.get(), options(rs, seed));

  fs::create_directories(rs.out);
  const std::string name = catchsim_scenario_name(s.get());
  json artifacts = json::array();
  auto emit = [&](const std::string& suffix, const std::string& text) {
    const fs::path p = fs::path(rs.out) / (name + suffix);
    write_file(p, text);
    artifacts.push_back({{"path", p.string()}, {"sha256", sha256(p.string())}});
  };
  CString trace, summary, force, motion, torque;
  check(catchsim_result_trace_csv(r.get(), &trace.p), "trace");
  check(catchsim_result_summary_json(r.get(), &summary.p), "summary");
  check(catchsim_result_plot_csv(r.get(), "force", &force.p), "plot");
  check(catchsim_result_plot_csv(r.get(), "motion", &motion.p), "plot");
  check(catchsim_result_plot_csv(r.get(), "torque", &torque.p), "plot");
  emit("_trace.csv", trace.str());
  emit("_summary.json", summary.str() + "\n");
  emit("_force.csv", force.str());
  emit("_motion.csv", motion.str());
  emit("_torque.csv", torque.str());

  const std::string model = catchsim_scenario_model_path(s.get());
  const std::string profile = catchsim_scenario_profile_path(s.get());
  const json manifest = {
      {"format_version", 1},
      {"catchsim_version", catchsim_version()},
      {"config", fs::absolute(rs.config).string()},
      {"config_sha256", sha256(rs.config)},
      {"scenario", name},
      {"strategy", catchsim_scenario_strategy(s.get())},
      {"seed", seed},
      {"dim", rs.dim},
      {"k_c", rs.k_c},
      {"deterministic", rs.deterministic},
      {"model", {{"path", model}, {"sha256", sha256(model)}}},
      {"profile", {{"path", profile}, {"sha256", sha256(profile)}}},
      {"output_dir", fs::absolute(rs.out).string()},
      {"artifacts", artifacts}};
  const fs::path mp = fs::path(rs.out) / (name + "_manifest.json");
  write_file(mp, manifest.dump(2) + "\n");

  std::printf("%s %s outcome=%s", name.c_str(), catchsim_result_strategy(r.get()),
              catchsim_result_outcome(r.get()));
  for (const char* m : {"F_max", "VME", "LOI", "BTI"}) {
    double v = 0.0;
    if (catchsim_result_metric(r.get(), m, &v) == CATCHSIM_OK) std::printf(" %s=%.4g", m, v);
  }
  std::printf("\nmanifest: %s\n", mp.string().c_str());
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& configs, const RunSettings& rs) {
  if (configs.size() < 2) throw CliError{kExitConfig, "compare needs at least two configs"};
  std::vector<ScenarioPtr> scenarios;
  for (const std::string& c : configs) scenarios.push_back(load(c));
  std::vector<ResultPtr> results;
  bool any_dim = false;
  for (const ScenarioPtr& s : scenarios) {
    const std::uint64_t seed = pick_seed(rs, s.get());
    results.push_back(run_one(s.get(), options(rs, seed)));
    const std::string tag = catchsim_scenario_strategy(s.get());
    any_dim = any_dim || rs.dim == "on" ||
              (rs.dim != "off" && tag.size() > 4 && tag.substr(tag.size() - 4) == "-DIM");
  }
  std::vector<const catchsim_result*> raw;
  for (const ResultPtr& r : results) raw.push_back(r.get());
  CString table;
  check(catchsim_compare_csv(raw.data(), raw.size(), any_dim ? 1 : 0, &table.p), "compare");
  std::cout << table.str();
  if (!rs.out.empty()) {
    fs::create_directories(rs.out);
    write_file(fs::path(rs.out) / "compare.csv", table.str());
  }
  return kExitOk;
}

int cmd_train(bool synthetic, const std::string& demos, int components, std::uint64_t seed,
              const std::string& out) {
  if (components < 1) throw CliError{kExitConfig, "-K must be >= 1"};
  CString profile;
  double ll = 0.0;
  if (!demos.empty() && !synthetic) {
    check(catchsim_train_profile_demos(demos.c_str(), components, seed, &profile.p, &ll),
          "train-profile");
  } else {
    check(catchsim_train_profile_synthetic(components, seed, &profile.p, &ll), "train-profile");
  }
  if (out.empty() || out == "-") {
    std::cout << profile.str();
  } else {
    write_file(out, profile.str());
  }
  double k0 = 0.0, k1 = 0.0;
  check(catchsim_profile_stiffness_zz(profile.p, 0.0, &k0), "decode");
  check(catchsim_profile_stiffness_zz(profile.p, -0.27, &k1), "decode");
  std::fprintf(stderr, "log-likelihood %.6f per sample; K_zz %.1f N/m at 0, %.1f N/m at -0.27 m\n",
               ll, k0, k1);
  return kExitOk;
}

int cmd_calibrate(double k_c, double mass, double e) {
  double d_c = 0.0, achieved = 0.0, duration = 0.0;
  check(catchsim_calibrate_contact(k_c, mass, e, &d_c, &achieved, &duration),
        "calibrate-contact");
  std::printf("k_c=%.6g N/m mass=%.6g kg e=%.6g -> d_c=%.10g N s/m (closed-form e=%.10g, "
              "contact %.4g ms)\n",
              k_c, mass, e, d_c, achieved, duration * 1e3);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catchsim: impact-aware nonprehensile catching simulator"};
  app.require_subcommand(1);

  RunSettings rs;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", rs.out, "Output directory");
    sub->add_option("--seed", seed_value, "Measurement-noise seed (default: scenario seed)");
    sub->add_flag("--deterministic,!--no-deterministic", rs.deterministic,
                  "Reproducible seeds (default on)");
    sub->add_option("--dim", rs.dim, "Override the DIM task")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--k-c", rs.k_c, "Override the contact stiffness (N/m)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario and write its artifacts");
  run->add_option("--config", rs.config, "Scenario file");
  run->add_option("--manifest", rs.manifest, "Re-run the settings recorded in a manifest");
  add_common(run);

  std::vector<std::string> compare_configs;
  CLI::App* compare = app.add_subcommand("compare", "Metrics table across scenarios");
  compare->add_option("--config,configs", compare_configs, "Scenario files")->required();
  add_common(compare);

  bool synthetic = false;
  std::string demos, profile_out;
  int components = 8;
  std::uint64_t train_seed = 1;
  CLI::App* train = app.add_subcommand("train-profile", "Train the stiffness profile");
  train->add_flag("--synthetic", synthetic, "Use the built-in demonstration generator (default)");
  train->add_option("--demos", demos, "Demonstration CSV (delta_d_m,L11,...,L33)");
  train->add_option("-K,--components", components, "Mixture components");
  train->add_option("--seed", train_seed, "Generator and EM seed");
  train->add_option("--out", profile_out, "Profile file (default: stdout)");

  double k_c = 2000.0, mass = 0.1, e = 0.6;
  CLI::App* cal = app.add_subcommand("calibrate-contact", "Contact damping for a restitution");
  cal->add_option("--k-c", k_c, "Contact stiffness (N/m)");
  cal->add_option("--mass", mass, "Object mass (kg)");
  cal->add_option("--e", e, "Coefficient of restitution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }
  try {
    if (run->parsed() || compare->parsed()) {
      CLI::App* sub = run->parsed() ? run : compare;
      if (sub->count("--seed") > 0) rs.seed = seed_value;
    }
    if (run->parsed()) return cmd_run(rs);
    if (compare->parsed()) {
      if (compare->count("--out") == 0) rs.out.clear();
      return cmd_compare(compare_configs, rs);
    }
    if (train->parsed()) return cmd_train(synthetic, demos, components, train_seed, profile_out);
    if (cal->parsed()) return cmd_calibrate(k_c, mass, e);
  } catch (const CliError& err) {
    std::fprintf(stderr, "error: %s\n", err.message.c_str());
    return err.exit_code;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitFailure;
  }
  return kExitFailure;
}
