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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "catchsim/catchsim.h"

namespace {

std::string scenario_path(const char* name) {
  return std::string(catchsim_default_scenario_dir()) + "/" + name + ".json";
}

struct Owned {
  char* p = nullptr;
  ~Owned() { catchsim_string_free(p); }
};

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_STREQ(catchsim_version(), "0.1.0");
  EXPECT_STREQ(catchsim_status_string(CATCHSIM_OK), "ok");
  EXPECT_STREQ(catchsim_status_string(CATCHSIM_E_PARSE), "parse error");
}

TEST(CApi, NullArgumentsRejected) {
  catchsim_scenario* s = nullptr;
  EXPECT_EQ(catchsim_scenario_load(nullptr, &s), CATCHSIM_E_INVALID_ARGUMENT);
  EXPECT_NE(std::string(catchsim_last_error()).find("NULL"), std::string::npos);
  EXPECT_EQ(catchsim_run(nullptr, nullptr, nullptr), CATCHSIM_E_INVALID_ARGUMENT);
  catchsim_scenario_free(nullptr);
  catchsim_result_free(nullptr);
  catchsim_string_free(nullptr);
}

TEST(CApi, MissingFieldIsParseError) {
  const char* text =
      R"({"name": "x", "strategy": "VM-KH", "q0": [0, 0, 0, 0, 0, 0, 0],
          "object": {"position": [0, 0, 1], "velocity": [0, 0, 0]},
          "gains": {"K_qp": [1, 1, 1, 1, 1, 1, 1], "K_qd": [1, 1, 1, 1, 1, 1, 1]}})";
  catchsim_scenario* s = nullptr;
  EXPECT_EQ(catchsim_scenario_parse(text, nullptr, &s), CATCHSIM_E_PARSE);
  EXPECT_EQ(s, nullptr);
  EXPECT_NE(std::string(catchsim_last_error()).find("catch_plane_z"), std::string::npos);
  EXPECT_EQ(catchsim_scenario_parse("{not json", nullptr, &s), CATCHSIM_E_PARSE);
  EXPECT_EQ(catchsim_scenario_load("/nonexistent/x.json", &s), CATCHSIM_E_PARSE);
}

TEST(CApi, RunNominalDrop) {
  catchsim_scenario* s = nullptr;
  ASSERT_EQ(catchsim_scenario_load(scenario_path("nominal_drop_vm_vic").c_str(), &s),
            CATCHSIM_OK);
  EXPECT_STREQ(catchsim_scenario_strategy(s), "VM-VIC");
  EXPECT_STREQ(catchsim_scenario_name(s), "nominal_drop_vm_vic");
  catchsim_run_options o;
  catchsim_run_options_init(&o);
  EXPECT_EQ(o.dim, -1);
  catchsim_result* r = nullptr;
  ASSERT_EQ(catchsim_run(s, &o, &r), CATCHSIM_OK) << catchsim_last_error();
  EXPECT_STREQ(catchsim_result_outcome(r), "caught");
  double f = 0.0;
  EXPECT_EQ(catchsim_result_metric(r, "F_max", &f), CATCHSIM_OK);
  EXPECT_GT(f, 1.0);
  EXPECT_EQ(catchsim_result_metric(r, "bogus", &f), CATCHSIM_E_INVALID_ARGUMENT);
  EXPECT_GT(catchsim_result_rows(r), 100u);
  double t = -1.0;
  EXPECT_EQ(catchsim_result_row_value(r, 1, "t", &t), CATCHSIM_OK);
  EXPECT_NEAR(t, 1e-3, 1e-12);
  EXPECT_EQ(catchsim_result_row_value(r, 1u << 30, "t", &t), CATCHSIM_E_INVALID_ARGUMENT);

  Owned csv, summary, force, table;
  ASSERT_EQ(catchsim_result_trace_csv(r, &csv.p), CATCHSIM_OK);
  EXPECT_EQ(std::string(csv.p).rfind("t,phase,", 0), 0u);
  ASSERT_EQ(catchsim_result_summary_json(r, &summary.p), CATCHSIM_OK);
  EXPECT_NE(std::string(summary.p).find("\"outcome\": \"caught\""), std::string::npos);
  ASSERT_EQ(catchsim_result_plot_csv(r, "force", &force.p), CATCHSIM_OK);
  char* none = nullptr;
  EXPECT_EQ(catchsim_result_plot_csv(r, "polar", &none), CATCHSIM_E_INVALID_ARGUMENT);
  const catchsim_result* rows[] = {r, r};
  ASSERT_EQ(catchsim_compare_csv(rows, 2, 0, &table.p), CATCHSIM_OK);
  std::istringstream lines(table.p);
  std::string header, a, b;
  std::getline(lines, header);
  std::getline(lines, a);
  std::getline(lines, b);
  EXPECT_EQ(a, b);
  catchsim_result_free(r);
  catchsim_scenario_free(s);
}

TEST(CApi, AbsentMetricWithoutContact) {
  catchsim_scenario* s = nullptr;
  ASSERT_EQ(catchsim_scenario_load(scenario_path("nominal_drop_vm_kh").c_str(), &s), CATCHSIM_OK);
  Owned text;
  ASSERT_EQ(catchsim_scenario_to_json(s, &text.p), CATCHSIM_OK);
  std::string j = text.p;
  // move the ball out of reach and shorten the run
  const std::string from = "\"position\": [\n      0.5,\n      0.0,";
  const auto pos = j.find(from);
  ASSERT_NE(pos, std::string::npos) << j;
  j.replace(pos, from.size(), "\"position\": [\n      0.5,\n      0.9,");
  catchsim_scenario* far = nullptr;
  ASSERT_EQ(catchsim_scenario_parse(j.c_str(), nullptr, &far), CATCHSIM_OK) << catchsim_last_error();
  catchsim_result* r = nullptr;
  ASSERT_EQ(catchsim_run(far, nullptr, &r), CATCHSIM_OK) << catchsim_last_error();
  double v = 0.0;
  EXPECT_EQ(catchsim_result_metric(r, "LOI", &v), CATCHSIM_E_ABSENT);
  EXPECT_EQ(catchsim_result_metric(r, "tau_max", &v), CATCHSIM_OK);
  EXPECT_STRNE(catchsim_result_outcome(r), "caught");
  catchsim_result_free(r);
  catchsim_scenario_free(far);
  catchsim_scenario_free(s);
}

TEST(CApi, TrainingIsReproducible) {
  Owned a, b;
  double ll = 0.0;
  ASSERT_EQ(catchsim_train_profile_synthetic(8, 1, &a.p, &ll), CATCHSIM_OK);
  ASSERT_EQ(catchsim_train_profile_synthetic(8, 1, &b.p, nullptr), CATCHSIM_OK);
  EXPECT_STREQ(a.p, b.p);
  EXPECT_TRUE(std::isfinite(ll));
  double k_end = 0.0, k0 = 0.0;
  ASSERT_EQ(catchsim_profile_stiffness_zz(a.p, -0.27, &k_end), CATCHSIM_OK);
  ASSERT_EQ(catchsim_profile_stiffness_zz(a.p, 0.0, &k0), CATCHSIM_OK);
  EXPECT_GT(k_end, 1000.0);
  EXPECT_LT(k0, 150.0);
  char* none = nullptr;
  EXPECT_EQ(catchsim_train_profile_synthetic(0, 1, &none, nullptr), CATCHSIM_E_INVALID_ARGUMENT);
}

TEST(CApi, CalibrateContact) {
  double d = 0.0, e = 0.0, dur = 0.0;
  ASSERT_EQ(catchsim_calibrate_contact(2000.0, 0.1, 0.6, &d, &e, &dur), CATCHSIM_OK);
  EXPECT_GT(d, 0.0);
  EXPECT_NEAR(e, 0.6, 1e-9);
  EXPECT_GT(dur, 0.0);
  EXPECT_NE(catchsim_calibrate_contact(2000.0, 0.1, 1.5, &d, nullptr, nullptr), CATCHSIM_OK);
}

TEST(CApi, Sha256KnownVector) {
  const std::string path = ::testing::TempDir() + "/catchsim_abc.txt";
  std::ofstream(path) << "abc";
  char hex[65];
  ASSERT_EQ(catchsim_sha256_file(path.c_str(), hex), CATCHSIM_OK);
  EXPECT_STREQ(hex, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(catchsim_sha256_file("/nonexistent", hex), CATCHSIM_E_IO);
  std::remove(path.c_str());
}

}  // namespace
