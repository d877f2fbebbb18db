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

// Catching-quality metrics computed from a simulation trace: lift-off,
// damping-ratio and bouncing-time indices, peak force, velocity-matching
// error, catch position error, average DIM and joint torque statistics.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "catchsim/json_util.hpp"
#include "catchsim/sim.hpp"

namespace catchsim {

struct MetricsOptions {
  double contact_loss = 0.5;      // N, below this the contact counts as lost
  double peak_separation = 5e-3;  // s, minimum spacing of force peaks
  // Peaks must exceed this; negative: the trace's F_th.
  double peak_threshold = -1.0;
};

struct MetricsReport {
  std::string scenario;
  std::string strategy;
  Outcome outcome = Outcome::kRunning;
  bool contact = false;
  // POC-only metrics are absent when there was no contact or no settled
  // POC window (locked / missed runs).
  std::optional<double> LOI;  // N s, first contact to steady state
  std::optional<double> LOI_poc_window;  // N s, over [t_poc, t_poc + dt_poc]
  std::optional<double> DRI;
  std::optional<double> BTI;  // ms
  std::optional<double> F_max;
  std::optional<double> VME;
  std::optional<double> x_tilde;
  std::optional<double> ADIM;
  double tau_max = 0.0;  // N m, max over joints and time
  double tau_rms = 0.0;  // N m, sum over joints of the per-joint RMS
  std::vector<double> tau_max_joint;
  std::vector<double> tau_rms_joint;
  double window_start = 0.0;
  double window_end = 0.0;
};

// Samples of a scalar signal; times strictly increasing.
struct Signal {
  std::vector<double> t;
  std::vector<double> y;
};

// Trapezoidal integral of |y - offset| over [a, b] (linear interpolation
// at the ends).
double integrate_abs(const Signal& s, double offset, double a, double b);
// Total time in [a, b] with y < threshold (piecewise-linear crossings).
double time_below(const Signal& s, double threshold, double a, double b);
// Local maxima above threshold; closer peaks than min_separation keep the
// larger one. Returns indices into s.
std::vector<std::size_t> find_peaks(const Signal& s, double threshold,
                                    double min_separation);
// (1 + (2 pi / delta)^2)^(-1/2) with delta = log(p1 / p2); 0 for p1 == p2.
double damping_ratio_index(double p1, double p2);
// Second peak that gives a target DRI for a first peak p1.
double peak_for_dri(double p1, double dri);

MetricsReport compute_metrics(const SimTrace& trace, const MetricsOptions& options = {});

json metrics_to_json(const MetricsReport& m);
// Run summary: outcome, timings, contact bookkeeping and metrics.
json run_summary(const SimTrace& trace, const MetricsReport& m);

// Table rows in the order LOI, DRI, BTI, F_max, VME, x_tilde (+ ADIM,
// tau_max, tau_rms when with_dim_columns). Absent values are "-".
std::string compare_csv(const std::vector<MetricsReport>& rows, bool with_dim_columns);

// Plot-ready data. Force: t, F_x, F_y, F_z, weight, contact, phase.
// Motion: t, tool / desired / object position and velocity, K_p.
// Torque: one row per joint with max |tau|, RMS and the limit.
std::string plot_force_csv(const SimTrace& trace);
std::string plot_motion_csv(const SimTrace& trace);
std::string plot_torque_csv(const SimTrace& trace, const MetricsReport& m);

}  // namespace catchsim
