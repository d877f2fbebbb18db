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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "catchsim/scenario.hpp"

namespace catchsim {
namespace {

namespace fs = std::filesystem;

class ScenarioFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("catchsim_scn_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  static json minimal() {
    return json{{"name", "t"},
                {"strategy", "VM-KH"},
                {"q0", {0.0, -0.2, 0.0, -1.9, 0.0, 1.7, 0.78}},
                {"object", {{"position", {0.5, 0.0, 0.67}}, {"velocity", {0, 0, 0}}}},
                {"catch_plane_z", 0.35},
                {"gains", {{"K_qp", std::vector<double>(7, 3000.0)},
                           {"K_qd", std::vector<double>(7, 80.0)}}}};
  }

  fs::path dir_;
};

TEST(Strategy, TagsRoundTrip) {
  for (Strategy s : all_strategies()) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_EQ(all_strategies().size(), 7u);
  EXPECT_THROW(parse_strategy("VM-XYZ"), ParseError);
}

TEST(Strategy, Flags) {
  EXPECT_FALSE(velocity_matching(Strategy::kFpKh));
  EXPECT_TRUE(velocity_matching(Strategy::kVmKl));
  EXPECT_TRUE(variable_impedance(Strategy::kVmVicDim));
  EXPECT_FALSE(variable_impedance(Strategy::kVmSic));
  EXPECT_TRUE(dim_enabled(Strategy::kVmVicDim));
  EXPECT_FALSE(dim_enabled(Strategy::kVmVic));
}

TEST_F(ScenarioFiles, MinimalParsesWithDefaults) {
  const ScenarioConfig c = load_scenario(write("a.json", minimal()));
  EXPECT_EQ(c.strategy, Strategy::kVmKh);
  EXPECT_DOUBLE_EQ(c.F_th, 3.0);
  EXPECT_DOUBLE_EQ(c.contact.e, 0.6);
  EXPECT_DOUBLE_EQ(c.object_mass, 0.1);
  EXPECT_DOUBLE_EQ(c.poc_defaults().d_lim, 0.13);
}

TEST_F(ScenarioFiles, MissingFieldNamed) {
  json j = minimal();
  j["gains"].erase("K_qp");
  try {
    load_scenario(write("a.json", j));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("gains.K_qp"), std::string::npos) << e.what();
  }
  json k = minimal();
  k.erase("catch_plane_z");
  try {
    load_scenario(write("b.json", k));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("catch_plane_z"), std::string::npos) << e.what();
  }
}

TEST_F(ScenarioFiles, UnknownFieldRejected) {
  json j = minimal();
  j["contact"] = {{"k_C", 10.0}};
  EXPECT_THROW(load_scenario(write("a.json", j)), ParseError);
}

TEST_F(ScenarioFiles, WrongTypeRejected) {
  json j = minimal();
  j["catch_plane_z"] = "low";
  EXPECT_THROW(load_scenario(write("a.json", j)), ParseError);
  json k = minimal();
  k["q0"] = {0.0, 1.0};
  EXPECT_THROW(load_scenario(write("b.json", k)), Error);
}

TEST_F(ScenarioFiles, InvalidValuesRejected) {
  json j = minimal();
  j["contact"] = {{"e", 1.5}};
  EXPECT_THROW(load_scenario(write("a.json", j)), Error);
  json k = minimal();
  k["rates"] = {{"dt_ctrl", 0.00125}};
  EXPECT_THROW(load_scenario(write("b.json", k)), Error);
}

TEST_F(ScenarioFiles, IncludeMergesNestedFields) {
  json base = minimal();
  base["contact"] = {{"k_c", 3000.0}, {"e", 0.5}};
  write("base.json", base);
  const json child = {{"include", "base.json"}, {"strategy", "FP-KL"}, {"contact", {{"e", 0.2}}}};
  const ScenarioConfig c = load_scenario(write("child.json", child));
  EXPECT_EQ(c.strategy, Strategy::kFpKl);
  EXPECT_DOUBLE_EQ(c.contact.k_c, 3000.0);
  EXPECT_DOUBLE_EQ(c.contact.e, 0.2);
}

TEST_F(ScenarioFiles, IncludeListAppliedInOrder) {
  write("a.json", minimal());
  write("b.json", json{{"F_th", 4.0}});
  write("c.json", json{{"F_th", 5.0}, {"t_max", 3.0}});
  const ScenarioConfig c =
      load_scenario(write("d.json", json{{"include", {"a.json", "b.json", "c.json"}}}));
  EXPECT_DOUBLE_EQ(c.F_th, 5.0);
  EXPECT_DOUBLE_EQ(c.t_max, 3.0);
}

TEST_F(ScenarioFiles, IncludeCycleRejected) {
  write("x.json", json{{"include", "y.json"}});
  write("y.json", json{{"include", "x.json"}});
  EXPECT_THROW(load_scenario((dir_ / "x.json").string()), ParseError);
}

TEST_F(ScenarioFiles, MissingIncludeRejected) {
  EXPECT_THROW(load_scenario(write("a.json", json{{"include", "nope.json"}})), ParseError);
}

TEST_F(ScenarioFiles, JsonRoundTrip) {
  const ScenarioConfig a = load_scenario(default_scenario_dir() + "/throw_2d_vm_vic_dim.json");
  const ScenarioConfig b = scenario_from_json(scenario_to_json(a));
  EXPECT_EQ(scenario_to_json(a), scenario_to_json(b));
  EXPECT_TRUE(b.planar);
  EXPECT_EQ(b.strategy, Strategy::kVmVicDim);
}

TEST(BundledScenarios, AllLoad) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(default_scenario_dir())) {
    const std::string f = e.path().filename().string();
    if (f.rfind("base_", 0) == 0) continue;
    EXPECT_NO_THROW(load_scenario(e.path().string())) << f;
    ++n;
  }
  EXPECT_EQ(n, 9);
}

TEST(BundledScenarios, NominalDropSetup) {
  const ScenarioConfig c = load_scenario(default_scenario_dir() + "/nominal_drop_vm_vic.json");
  EXPECT_DOUBLE_EQ(c.object_position.z(), 0.67);
  EXPECT_DOUBLE_EQ(c.catch_plane_z, 0.35);
  EXPECT_DOUBLE_EQ(c.object_mass, 0.1);
  EXPECT_DOUBLE_EQ(c.F_th, 3.0);
}

}  // namespace
}  // namespace catchsim
