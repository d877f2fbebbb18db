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

#include "catchsim/catchsim.h"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "catchsim/impact.hpp"
#include "catchsim/metrics.hpp"
#include "catchsim/sim.hpp"

struct catchsim_scenario {
  catchsim::ScenarioConfig config;
  std::string strategy;
  std::string model_path;
  std::string profile_path;
};

struct catchsim_result {
  catchsim::SimTrace trace;
  catchsim::MetricsReport metrics;
  std::string outcome;
  std::string strategy;
};

namespace {

using namespace catchsim;

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Runs f, translating exceptions into status codes.
int guarded(const std::function<void()>& f) {
  try {
    f();
    g_last_error.clear();
    return CATCHSIM_OK;
  } catch (const ParseError& e) {
    return fail(CATCHSIM_E_PARSE, e.what());
  } catch (const InvalidArgument& e) {
    return fail(CATCHSIM_E_INVALID_ARGUMENT, e.what());
  } catch (const DimensionError& e) {
    return fail(CATCHSIM_E_DIMENSION, e.what());
  } catch (const SingularError& e) {
    return fail(CATCHSIM_E_SINGULAR, e.what());
  } catch (const NumericalError& e) {
    return fail(CATCHSIM_E_NUMERICAL, e.what());
  } catch (const Error& e) {
    return fail(CATCHSIM_E_FAILED, e.what());
  } catch (const json::exception& e) {
    return fail(CATCHSIM_E_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CATCHSIM_E_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(CATCHSIM_E_INTERNAL, e.what());
  } catch (...) {
    return fail(CATCHSIM_E_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " is NULL");
}

catchsim_scenario* wrap(ScenarioConfig c) {
  auto* s = new catchsim_scenario;
  s->strategy = to_string(c.strategy);
  s->model_path = c.model_path.empty() ? default_arm_model_path() : c.model_path;
  s->profile_path = c.profile_path.empty() ? default_profile_path() : c.profile_path;
  s->config = std::move(c);
  return s;
}

std::optional<double> metric(const catchsim_result& r, const std::string& name) {
  const MetricsReport& m = r.metrics;
  const SimTrace& t = r.trace;
  static const std::map<std::string, std::function<std::optional<double>(
                                         const MetricsReport&, const SimTrace&)>>
      table = {
          {"LOI", [](auto& m, auto&) { return m.LOI; }},
          {"LOI_poc_window", [](auto& m, auto&) { return m.LOI_poc_window; }},
          {"DRI", [](auto& m, auto&) { return m.DRI; }},
          {"BTI", [](auto& m, auto&) { return m.BTI; }},
          {"F_max", [](auto& m, auto&) { return m.F_max; }},
          {"VME", [](auto& m, auto&) { return m.VME; }},
          {"x_tilde", [](auto& m, auto&) { return m.x_tilde; }},
          {"ADIM", [](auto& m, auto&) { return m.ADIM; }},
          {"tau_max", [](auto& m, auto&) { return std::optional<double>(m.tau_max); }},
          {"tau_rms", [](auto& m, auto&) { return std::optional<double>(m.tau_rms); }},
          {"t_first_contact",
           [](auto&, auto& t) {
             return t.t_first_contact >= 0 ? std::optional<double>(t.t_first_contact)
                                           : std::nullopt;
           }},
          {"t_poc",
           [](auto&, auto& t) {
             return t.t_poc >= 0 ? std::optional<double>(t.t_poc) : std::nullopt;
           }},
          {"dt_poc", [](auto&, auto& t) { return std::optional<double>(t.dt_poc); }},
          {"first_impulse", [](auto&, auto& t) { return std::optional<double>(t.first_impulse); }},
          {"analytic_impulse",
           [](auto&, auto& t) { return std::optional<double>(t.analytic_impulse); }},
          {"reflected_mass", [](auto&, auto& t) { return std::optional<double>(t.reflected_mass); }},
          {"max_penetration",
           [](auto&, auto& t) { return std::optional<double>(t.max_penetration); }},
          {"max_contact_force",
           [](auto&, auto& t) { return std::optional<double>(t.max_contact_force); }},
          {"momentum_residual",
           [](auto&, auto& t) { return std::optional<double>(t.momentum_residual); }},
          {"max_plan_seconds",
           [](auto&, auto& t) { return std::optional<double>(t.max_plan_seconds); }},
          {"safe_stops",
           [](auto&, auto& t) { return std::optional<double>(static_cast<double>(t.safe_stops)); }},
          {"lock_joint",
           [](auto&, auto& t) {
             return t.lock_joint >= 0 ? std::optional<double>(t.lock_joint + 1) : std::nullopt;
           }},
      };
  auto it = table.find(name);
  if (it == table.end()) throw InvalidArgument("unknown metric '" + name + "'");
  return it->second(m, t);
}

int train(const std::vector<DemoSample>& demos, int components, uint64_t seed,
          const std::string& generator, char** profile_json, double* ll) {
  return guarded([&] {
    require(profile_json, "profile_json");
    if (components < 1) throw InvalidArgument("components must be >= 1");
    GmmOptions o;
    o.components = components;
    o.seed = seed;
    StiffnessProfile p = train_profile(demos, o);
    p.generator = generator;
    if (ll) *ll = p.log_likelihood;
    *profile_json = dup_string(profile_to_json(p));
  });
}

}  // namespace

extern "C" {

const char* catchsim_version(void) { return "0.1.0"; }

const char* catchsim_last_error(void) { return g_last_error.c_str(); }

const char* catchsim_status_string(int status) {
  switch (status) {
    case CATCHSIM_OK: return "ok";
    case CATCHSIM_E_INVALID_ARGUMENT: return "invalid argument";
    case CATCHSIM_E_PARSE: return "parse error";
    case CATCHSIM_E_DIMENSION: return "dimension mismatch";
    case CATCHSIM_E_SINGULAR: return "singular";
    case CATCHSIM_E_NUMERICAL: return "numerical failure";
    case CATCHSIM_E_IO: return "i/o error";
    case CATCHSIM_E_ABSENT: return "value absent";
    case CATCHSIM_E_FAILED: return "failed";
    case CATCHSIM_E_NO_MEMORY: return "out of memory";
    default: return "internal error";
  }
}

void catchsim_string_free(char* s) { std::free(s); }

int catchsim_scenario_load(const char* path, catchsim_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = wrap(load_scenario(path));
  });
}

int catchsim_scenario_parse(const char* json_text, const char* base_dir,
                            catchsim_scenario** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    json j;
    try {
      j = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("scenario: ") + e.what());
    }
    if (j.contains("include")) {
      throw ParseError("scenario: include needs a file; use catchsim_scenario_load");
    }
    *out = wrap(scenario_from_json(j, base_dir ? base_dir : ""));
  });
}

void catchsim_scenario_free(catchsim_scenario* s) { delete s; }

const char* catchsim_scenario_name(const catchsim_scenario* s) {
  return s ? s->config.name.c_str() : "";
}

const char* catchsim_scenario_strategy(const catchsim_scenario* s) {
  return s ? s->strategy.c_str() : "";
}

const char* catchsim_scenario_model_path(const catchsim_scenario* s) {
  return s ? s->model_path.c_str() : "";
}

const char* catchsim_scenario_profile_path(const catchsim_scenario* s) {
  return s ? s->profile_path.c_str() : "";
}

int catchsim_scenario_to_json(const catchsim_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = dup_string(scenario_to_json(s->config).dump(2));
  });
}

const char* catchsim_default_scenario_dir(void) {
  static const std::string dir = default_scenario_dir();
  return dir.c_str();
}

void catchsim_run_options_init(catchsim_run_options* o) {
  if (!o) return;
  o->dim = -1;
  o->has_seed = 0;
  o->seed = 0;
  o->k_c = 0.0;
  o->compare_without_dim = -1;
}

int catchsim_run(const catchsim_scenario* s, const catchsim_run_options* o,
                 catchsim_result** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = nullptr;
    RunOptions ro;
    if (o) {
      if (o->dim >= 0) ro.dim = o->dim != 0;
      if (o->has_seed) ro.seed = o->seed;
      if (o->k_c > 0.0) ro.k_c = o->k_c;
      if (o->compare_without_dim >= 0) ro.compare_without_dim = o->compare_without_dim != 0;
    }
    auto r = std::make_unique<catchsim_result>();
    r->trace = run_scenario(s->config, ro);
    r->metrics = compute_metrics(r->trace);
    r->outcome = to_string(r->trace.outcome);
    r->strategy = to_string(r->trace.strategy);
    *out = r.release();
  });
}

void catchsim_result_free(catchsim_result* r) { delete r; }

const char* catchsim_result_outcome(const catchsim_result* r) {
  return r ? r->outcome.c_str() : "";
}

const char* catchsim_result_strategy(const catchsim_result* r) {
  return r ? r->strategy.c_str() : "";
}

int catchsim_result_metric(const catchsim_result* r, const char* name, double* value) {
  bool absent = false;
  const int rc = guarded([&] {
    require(r, "result");
    require(name, "name");
    require(value, "value");
    const std::optional<double> v = metric(*r, name);
    if (v) {
      *value = *v;
    } else {
      absent = true;
    }
  });
  if (rc == CATCHSIM_OK && absent) {
    return fail(CATCHSIM_E_ABSENT, std::string(name) + " is not defined for this run");
  }
  return rc;
}

int catchsim_result_trace_csv(const catchsim_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(trace_csv(r->trace));
  });
}

int catchsim_result_summary_json(const catchsim_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(run_summary(r->trace, r->metrics).dump(2));
  });
}

int catchsim_result_plot_csv(const catchsim_result* r, const char* kind, char** out) {
  return guarded([&] {
    require(r, "result");
    require(kind, "kind");
    require(out, "out");
    const std::string k = kind;
    if (k == "force") {
      *out = dup_string(plot_force_csv(r->trace));
    } else if (k == "motion") {
      *out = dup_string(plot_motion_csv(r->trace));
    } else if (k == "torque") {
      *out = dup_string(plot_torque_csv(r->trace, r->metrics));
    } else {
      throw InvalidArgument("plot kind must be force, motion or torque");
    }
  });
}

size_t catchsim_result_rows(const catchsim_result* r) { return r ? r->trace.rows.size() : 0; }

int catchsim_result_row_value(const catchsim_result* r, size_t row, const char* column,
                              double* value) {
  return guarded([&] {
    require(r, "result");
    require(column, "column");
    require(value, "value");
    if (row >= r->trace.rows.size()) throw InvalidArgument("row out of range");
    const TraceRow& tr = r->trace.rows[row];
    const std::string c = column;
    if (c == "t") {
      *value = tr.t;
    } else if (c == "dim_value") {
      *value = tr.dim_value;
    } else if (c == "clik_residual") {
      *value = tr.clik_residual;
    } else if (c == "clik_residual_no_dim") {
      *value = tr.clik_residual_no_dim;
    } else if (c == "phase") {
      *value = static_cast<double>(tr.phase);
    } else if (c == "F_z") {
      *value = tr.F.z();
    } else {
      throw InvalidArgument("unknown column '" + c + "'");
    }
  });
}

int catchsim_compare_csv(const catchsim_result* const* results, size_t n,
                         int with_dim_columns, char** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(results, "results");
    std::vector<MetricsReport> rows;
    for (size_t i = 0; i < n; ++i) {
      require(results[i], "results[i]");
      rows.push_back(results[i]->metrics);
    }
    *out = dup_string(compare_csv(rows, with_dim_columns != 0));
  });
}

int catchsim_train_profile_synthetic(int components, uint64_t seed, char** profile_json,
                                     double* log_likelihood) {
  std::vector<DemoSample> demos;
  const int rc = guarded([&] {
    demos = synth_demonstrations(bundled_synth_params(), kBundledDemoCount, seed);
  });
  if (rc != CATCHSIM_OK) return rc;
  return train(demos, components, seed, kSynthGeneratorVersion, profile_json, log_likelihood);
}

int catchsim_train_profile_demos(const char* demos_csv_path, int components, uint64_t seed,
                                 char** profile_json, double* log_likelihood) {
  std::vector<DemoSample> demos;
  const int rc = guarded([&] {
    require(demos_csv_path, "demos_csv_path");
    demos = read_demos_csv(demos_csv_path);
  });
  if (rc != CATCHSIM_OK) return rc;
  return train(demos, components, seed, std::string("demos:") + demos_csv_path, profile_json,
               log_likelihood);
}

int catchsim_profile_stiffness_zz(const char* profile_json, double delta_d, double* k_zz) {
  return guarded([&] {
    require(profile_json, "profile_json");
    require(k_zz, "k_zz");
    *k_zz = gmr_predict(profile_from_json(profile_json), delta_d).K(2, 2);
  });
}

int catchsim_calibrate_contact(double k_c, double mass, double e, double* d_c,
                               double* achieved_e, double* duration) {
  return guarded([&] {
    require(d_c, "d_c");
    *d_c = calibrate_contact_damping(k_c, mass, e);
    const ContactResponse r = contact_response(k_c, *d_c, mass);
    if (achieved_e) *achieved_e = r.restitution;
    if (duration) *duration = r.duration;
  });
}

int catchsim_sha256_file(const char* path, char hex_out[65]) {
  if (!path || !hex_out) return fail(CATCHSIM_E_INVALID_ARGUMENT, "path or hex_out is NULL");
  std::ifstream in(path, std::ios::binary);
  if (!in) return fail(CATCHSIM_E_IO, std::string("cannot open ") + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) return fail(CATCHSIM_E_NO_MEMORY, "out of memory");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  for (unsigned int i = 0; i < len; ++i) std::snprintf(hex_out + 2 * i, 3, "%02x", md[i]);
  hex_out[2 * len] = '\0';
  g_last_error.clear();
  return CATCHSIM_OK;
}

}  // extern "C"
