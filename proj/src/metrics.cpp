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

#include "catchsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace catchsim {

namespace {

double lerp_at(const Signal& s, std::size_t i, double t) {
  const double t0 = s.t[i], t1 = s.t[i + 1];
  if (t1 <= t0) return s.y[i];
  const double a = (t - t0) / (t1 - t0);
  return s.y[i] + a * (s.y[i + 1] - s.y[i]);
}

void check_signal(const Signal& s) {
  if (s.t.size() != s.y.size()) throw DimensionError("signal: t and y sizes differ");
}

// Visits each linear piece clipped to [a, b]: f(t0, t1, y0, y1).
template <typename F>
void for_pieces(const Signal& s, double a, double b, F&& f) {
  check_signal(s);
  if (s.t.size() < 2 || b <= a) return;
  for (std::size_t i = 0; i + 1 < s.t.size(); ++i) {
    const double lo = std::max(a, s.t[i]);
    const double hi = std::min(b, s.t[i + 1]);
    if (hi <= lo) continue;
    f(lo, hi, lerp_at(s, i, lo), lerp_at(s, i, hi));
  }
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

double integrate_abs(const Signal& s, double offset, double a, double b) {
  double sum = 0.0;
  for_pieces(s, a, b, [&](double t0, double t1, double y0, double y1) {
    y0 -= offset;
    y1 -= offset;
    const double dt = t1 - t0;
    if (y0 * y1 >= 0.0) {
      sum += 0.5 * dt * (std::abs(y0) + std::abs(y1));
    } else {
      // exact for a line crossing zero
      sum += 0.5 * dt * (y0 * y0 + y1 * y1) / (std::abs(y0) + std::abs(y1));
    }
  });
  return sum;
}

double time_below(const Signal& s, double threshold, double a, double b) {
  double sum = 0.0;
  for_pieces(s, a, b, [&](double t0, double t1, double y0, double y1) {
    const double dt = t1 - t0;
    const bool b0 = y0 < threshold, b1 = y1 < threshold;
    if (b0 && b1) {
      sum += dt;
    } else if (b0 != b1) {
      const double frac = (threshold - y0) / (y1 - y0);
      sum += b0 ? frac * dt : (1.0 - frac) * dt;
    }
  });
  return sum;
}

std::vector<std::size_t> find_peaks(const Signal& s, double threshold,
                                    double min_separation) {
  check_signal(s);
  std::vector<std::size_t> cand;
  const std::size_t n = s.y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double y = s.y[i];
    if (!(y > threshold)) continue;
    const bool left = i == 0 || y >= s.y[i - 1];
    const bool right = i + 1 == n || y > s.y[i + 1];
    if (left && right) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [&](std::size_t a, std::size_t b) { return s.y[a] > s.y[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t c : cand) {
    bool ok = true;
    for (std::size_t k : kept) {
      if (std::abs(s.t[c] - s.t[k]) < min_separation) ok = false;
    }
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

double damping_ratio_index(double p1, double p2) {
  if (!(p1 > 0.0) || !(p2 > 0.0)) throw InvalidArgument("DRI: peaks must be positive");
  const double delta = std::abs(std::log(p1 / p2));
  if (delta == 0.0) return 0.0;
  const double r = 2.0 * std::numbers::pi / delta;
  return 1.0 / std::sqrt(1.0 + r * r);
}

double peak_for_dri(double p1, double dri) {
  if (!(dri >= 0.0) || !(dri < 1.0)) throw InvalidArgument("DRI must lie in [0, 1)");
  if (dri == 0.0) return p1;
  const double delta = 2.0 * std::numbers::pi * dri / std::sqrt(1.0 - dri * dri);
  return p1 * std::exp(-delta);
}

MetricsReport compute_metrics(const SimTrace& trace, const MetricsOptions& options) {
  MetricsReport m;
  m.scenario = trace.scenario;
  m.strategy = to_string(trace.strategy);
  m.outcome = trace.outcome;

  const std::size_t rows = trace.rows.size();
  const int n = trace.n_dof;

  // Joint torques over the whole run.
  m.tau_max_joint.assign(static_cast<std::size_t>(n), 0.0);
  m.tau_rms_joint.assign(static_cast<std::size_t>(n), 0.0);
  if (rows > 0) {
    const double t0 = trace.rows.front().t, t1 = trace.rows.back().t;
    for (int j = 0; j < n; ++j) {
      Signal sq;
      double mx = 0.0;
      for (const TraceRow& r : trace.rows) {
        const double tj = r.tau[j];
        mx = std::max(mx, std::abs(tj));
        sq.t.push_back(r.t);
        sq.y.push_back(tj * tj);
      }
      m.tau_max_joint[static_cast<std::size_t>(j)] = mx;
      double rms = rows == 1 ? std::sqrt(sq.y[0])
                             : std::sqrt(integrate_abs(sq, 0.0, t0, t1) / (t1 - t0));
      m.tau_rms_joint[static_cast<std::size_t>(j)] = rms;
      m.tau_max = std::max(m.tau_max, mx);
      m.tau_rms += rms;
    }
  }

  if (trace.t_first_contact < 0.0 || rows < 2) return m;
  m.contact = true;

  Signal fz, fnorm, dim;
  double fmax = 0.0;
  for (const TraceRow& r : trace.rows) {
    fz.t.push_back(r.t);
    fz.y.push_back(r.F.z());
    fnorm.t.push_back(r.t);
    fnorm.y.push_back(r.F.norm());
    dim.t.push_back(r.t);
    dim.y.push_back(r.dim_value);
    fmax = std::max(fmax, std::abs(r.F.z()));
  }
  m.F_max = fmax;
  m.VME = (trace.contact_robot_velocity - trace.contact_object_velocity).norm();
  if (trace.prediction.valid) {
    m.x_tilde = (trace.contact_robot_position - trace.prediction.x_at_tc).norm();
  }

  const double a = trace.t_first_contact;
  const double b = trace.t_steady_start >= a ? trace.t_steady_start : trace.rows.back().t;
  m.window_start = a;
  m.window_end = b;
  const double weight = trace.object_mass * trace.gravity;

  m.LOI = integrate_abs(fz, weight, a, b);
  if (trace.t_poc >= 0.0 && trace.dt_poc > 0.0) {
    m.LOI_poc_window = integrate_abs(fz, weight, trace.t_poc, trace.t_poc + trace.dt_poc);
  }
  m.BTI = 1e3 * time_below(fnorm, options.contact_loss, a, b);
  if (b > a) m.ADIM = integrate_abs(dim, 0.0, a, b) / (b - a);

  // Peaks from first contact on.
  Signal after;
  for (std::size_t i = 0; i < rows; ++i) {
    if (fz.t[i] + 1e-12 >= a) {
      after.t.push_back(fz.t[i]);
      after.y.push_back(fz.y[i]);
    }
  }
  const double thr = options.peak_threshold >= 0.0 ? options.peak_threshold : trace.F_th;
  std::vector<std::size_t> peaks = find_peaks(after, thr, options.peak_separation);
  if (peaks.size() >= 2) {
    std::vector<double> h;
    for (std::size_t p : peaks) h.push_back(after.y[p]);
    std::sort(h.begin(), h.end(), std::greater<>());
    m.DRI = damping_ratio_index(h[0], h[1]);
  }
  return m;
}

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["scenario"] = m.scenario;
  j["strategy"] = m.strategy;
  j["outcome"] = to_string(m.outcome);
  j["contact"] = m.contact;
  j["LOI"] = opt_json(m.LOI);
  j["LOI_poc_window"] = opt_json(m.LOI_poc_window);
  j["DRI"] = opt_json(m.DRI);
  j["BTI_ms"] = opt_json(m.BTI);
  j["F_max"] = opt_json(m.F_max);
  j["VME"] = opt_json(m.VME);
  j["x_tilde"] = opt_json(m.x_tilde);
  j["ADIM"] = opt_json(m.ADIM);
  j["tau_max"] = m.tau_max;
  j["tau_rms"] = m.tau_rms;
  j["tau_max_joint"] = m.tau_max_joint;
  j["tau_rms_joint"] = m.tau_rms_joint;
  j["window"] = {m.window_start, m.window_end};
  return j;
}

json run_summary(const SimTrace& trace, const MetricsReport& m) {
  json j;
  j["scenario"] = trace.scenario;
  j["strategy"] = to_string(trace.strategy);
  j["outcome"] = to_string(trace.outcome);
  j["t_first_contact"] = trace.t_first_contact;
  j["t_poc"] = trace.t_poc;
  j["poc_by_force"] = trace.poc_by_force;
  j["dt_poc"] = trace.dt_poc;
  j["t_steady_start"] = trace.t_steady_start;
  j["t_done"] = trace.t_done;
  j["lock_joint"] = trace.lock_joint;
  j["prediction"] = {{"valid", trace.prediction.valid},
                     {"t_c", trace.prediction.t_c},
                     {"x_at_tc", vec_to_json(trace.prediction.x_at_tc)},
                     {"v_at_tc", vec_to_json(trace.prediction.v_at_tc)}};
  j["contact"] = {{"first_impulse", trace.first_impulse},
                  {"first_episode_duration", trace.first_episode_duration},
                  {"analytic_impulse", trace.analytic_impulse},
                  {"reflected_mass", trace.reflected_mass},
                  {"robot_position", vec_to_json(trace.contact_robot_position)},
                  {"robot_velocity", vec_to_json(trace.contact_robot_velocity)},
                  {"object_velocity", vec_to_json(trace.contact_object_velocity)},
                  {"max_penetration", trace.max_penetration},
                  {"max_contact_force", trace.max_contact_force},
                  {"momentum_residual", trace.momentum_residual}};
  j["planner"] = {{"plans", trace.plans},
                  {"infeasible", trace.infeasible_plans},
                  {"max_solve_seconds", trace.max_plan_seconds}};
  j["safe_stops"] = trace.safe_stops;
  json ev = json::array();
  for (const SimEvent& e : trace.events) ev.push_back({{"t", e.t}, {"text", e.text}});
  j["events"] = ev;
  j["metrics"] = metrics_to_json(m);
  return j;
}

std::string compare_csv(const std::vector<MetricsReport>& rows, bool with_dim_columns) {
  std::ostringstream out;
  out << "strategy,LOI,DRI,BTI,F_max,VME,x_tilde";
  if (with_dim_columns) out << ",ADIM,tau_max,tau_rms";
  out << ",outcome\n";
  for (const MetricsReport& m : rows) {
    // fixed-position rows carry no post-catch or catch-point metrics
    const bool fp = m.strategy.rfind("FP", 0) == 0;
    const std::optional<double> none;
    out << m.strategy << ',' << fmt(fp ? none : m.LOI) << ',' << fmt(fp ? none : m.DRI)
        << ',' << fmt(fp ? none : m.BTI) << ',' << fmt(m.F_max) << ',' << fmt(m.VME) << ','
        << fmt(fp ? none : m.x_tilde);
    if (with_dim_columns) {
      out << ',' << fmt(m.ADIM) << ',' << fmt(m.tau_max) << ',' << fmt(m.tau_rms);
    }
    out << ',' << to_string(m.outcome) << '\n';
  }
  return out.str();
}

namespace {

void put(std::ostringstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.10g", v);
  out << buf;
}

void put3(std::ostringstream& out, const Vec3& v) {
  for (int i = 0; i < 3; ++i) put(out, v[i]);
}

}  // namespace

std::string plot_force_csv(const SimTrace& trace) {
  std::ostringstream out;
  out << "t,F_x,F_y,F_z,weight,contact,phase\n";
  const double w = trace.object_mass * trace.gravity;
  for (const TraceRow& r : trace.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", r.t);
    out << buf;
    put3(out, r.F);
    put(out, w);
    out << ',' << (r.contact ? 1 : 0) << ',' << to_string(r.phase) << '\n';
  }
  return out.str();
}

std::string plot_motion_csv(const SimTrace& trace) {
  std::ostringstream out;
  out << "t";
  for (const char* g : {"x", "x_d", "obj_x", "v", "v_d", "obj_v", "Kp"}) {
    for (const char* a : {"_x", "_y", "_z"}) out << ',' << g << a;
  }
  out << '\n';
  for (const TraceRow& r : trace.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", r.t);
    out << buf;
    for (const Vec3* v : {&r.x, &r.x_d, &r.object_x, &r.v, &r.v_d, &r.object_v, &r.K_p}) {
      put3(out, *v);
    }
    out << '\n';
  }
  return out.str();
}

std::string plot_torque_csv(const SimTrace& trace, const MetricsReport& m) {
  std::ostringstream out;
  out << "joint,tau_max,tau_rms,tau_lim\n";
  for (std::size_t j = 0; j < m.tau_max_joint.size(); ++j) {
    out << j + 1;
    put(out, m.tau_max_joint[j]);
    put(out, m.tau_rms_joint[j]);
    put(out, j < static_cast<std::size_t>(trace.tau_lim.size())
                 ? trace.tau_lim[static_cast<Eigen::Index>(j)]
                 : 0.0);
    out << '\n';
  }
  return out.str();
}

}  // namespace catchsim
