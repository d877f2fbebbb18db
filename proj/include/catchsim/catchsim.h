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

/* C interface of the catching simulator. All handles are opaque; every
 * function returning int yields a catchsim_status. Strings handed out
 * through char** are owned by the caller and released with
 * catchsim_string_free. The last error message is kept per thread. */

#ifndef CATCHSIM_CATCHSIM_H_
#define CATCHSIM_CATCHSIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CATCHSIM_BUILDING_LIBRARY)
#define CATCHSIM_API __attribute__((visibility("default")))
#else
#define CATCHSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum catchsim_status {
  CATCHSIM_OK = 0,
  CATCHSIM_E_INVALID_ARGUMENT = 1,
  CATCHSIM_E_PARSE = 2,
  CATCHSIM_E_DIMENSION = 3,
  CATCHSIM_E_SINGULAR = 4,
  CATCHSIM_E_NUMERICAL = 5,
  CATCHSIM_E_IO = 6,
  CATCHSIM_E_ABSENT = 7, /* metric not defined for this run */
  CATCHSIM_E_FAILED = 8,
  CATCHSIM_E_NO_MEMORY = 9,
  CATCHSIM_E_INTERNAL = 99
} catchsim_status;

typedef struct catchsim_scenario catchsim_scenario;
typedef struct catchsim_result catchsim_result;

typedef struct catchsim_run_options {
  int dim;                 /* -1 strategy default, 0 off, 1 on */
  int has_seed;            /* nonzero: use seed for the measurement noise */
  uint64_t seed;
  double k_c;              /* <= 0: scenario value */
  int compare_without_dim; /* -1 scenario value, 0 off, 1 on */
} catchsim_run_options;

CATCHSIM_API const char* catchsim_version(void);
CATCHSIM_API const char* catchsim_last_error(void);
CATCHSIM_API const char* catchsim_status_string(int status);
CATCHSIM_API void catchsim_string_free(char* s);

/* Scenarios */
CATCHSIM_API int catchsim_scenario_load(const char* path, catchsim_scenario** out);
/* base_dir resolves relative includes and model/profile paths; may be NULL. */
CATCHSIM_API int catchsim_scenario_parse(const char* json_text, const char* base_dir,
                                         catchsim_scenario** out);
CATCHSIM_API void catchsim_scenario_free(catchsim_scenario* s);
CATCHSIM_API const char* catchsim_scenario_name(const catchsim_scenario* s);
CATCHSIM_API const char* catchsim_scenario_strategy(const catchsim_scenario* s);
/* Model and profile files the run will use (bundled ones if unset). */
CATCHSIM_API const char* catchsim_scenario_model_path(const catchsim_scenario* s);
CATCHSIM_API const char* catchsim_scenario_profile_path(const catchsim_scenario* s);
CATCHSIM_API int catchsim_scenario_to_json(const catchsim_scenario* s, char** out);
CATCHSIM_API const char* catchsim_default_scenario_dir(void);

/* Runs */
CATCHSIM_API void catchsim_run_options_init(catchsim_run_options* o);
CATCHSIM_API int catchsim_run(const catchsim_scenario* s, const catchsim_run_options* o,
                              catchsim_result** out);
CATCHSIM_API void catchsim_result_free(catchsim_result* r);
CATCHSIM_API const char* catchsim_result_outcome(const catchsim_result* r);
CATCHSIM_API const char* catchsim_result_strategy(const catchsim_result* r);
/* Names: LOI, LOI_poc_window, DRI, BTI, F_max, VME, x_tilde, ADIM, tau_max,
 * tau_rms, t_first_contact, t_poc, dt_poc, first_impulse, analytic_impulse,
 * reflected_mass, max_penetration, max_contact_force, momentum_residual,
 * max_plan_seconds, safe_stops, lock_joint. */
CATCHSIM_API int catchsim_result_metric(const catchsim_result* r, const char* name,
                                        double* value);
CATCHSIM_API int catchsim_result_trace_csv(const catchsim_result* r, char** out);
CATCHSIM_API int catchsim_result_summary_json(const catchsim_result* r, char** out);
/* kind: "force", "motion" or "torque". */
CATCHSIM_API int catchsim_result_plot_csv(const catchsim_result* r, const char* kind,
                                          char** out);
/* Number of control ticks and per-tick columns used by the acceptance
 * checks: dim_value, clik_residual, clik_residual_no_dim (-1 if absent). */
CATCHSIM_API size_t catchsim_result_rows(const catchsim_result* r);
CATCHSIM_API int catchsim_result_row_value(const catchsim_result* r, size_t row,
                                           const char* column, double* value);
CATCHSIM_API int catchsim_compare_csv(const catchsim_result* const* results, size_t n,
                                      int with_dim_columns, char** out);

/* Stiffness profile training. components >= 1. The JSON text is the
 * profile file format. */
CATCHSIM_API int catchsim_train_profile_synthetic(int components, uint64_t seed,
                                                  char** profile_json,
                                                  double* log_likelihood);
CATCHSIM_API int catchsim_train_profile_demos(const char* demos_csv_path, int components,
                                              uint64_t seed, char** profile_json,
                                              double* log_likelihood);
/* Decoded z-z stiffness of a profile at a normalized distance (m). */
CATCHSIM_API int catchsim_profile_stiffness_zz(const char* profile_json, double delta_d,
                                               double* k_zz);

/* Contact damping for a restitution target, plus the closed-form check. */
CATCHSIM_API int catchsim_calibrate_contact(double k_c, double mass, double e, double* d_c,
                                            double* achieved_e, double* duration);

/* Lowercase hex SHA-256 of a file (65 bytes incl. terminator). */
CATCHSIM_API int catchsim_sha256_file(const char* path, char hex_out[65]);

#ifdef __cplusplus
}
#endif

#endif /* CATCHSIM_CATCHSIM_H_ */
