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

#include "catchsim/poc.hpp"

#include <algorithm>
#include <cmath>

namespace catchsim {

Vec3 poc_final_point(const Vec3& x_c, const Vec3& v_c, double d_lim) {
  const double speed = v_c.norm();
  if (!(speed > 1e-9)) throw InvalidArgument("poc_final_point: zero catch speed");
  const double dz = d_lim * v_c.z() / speed;
  const double dxy = std::sqrt(std::max(0.0, d_lim * d_lim - dz * dz));
  const double vxy = v_c.head<2>().norm();
  Vec3 x_f = x_c;
  x_f.z() += dz;
  if (vxy > 0.0) x_f.head<2>() += dxy * v_c.head<2>() / vxy;
  return x_f;
}

PocPlan plan_poc(const Vec6& x_c, const Vec6& v_c, double d_lim, double dt_poc,
                 double a_max) {
  if (!(d_lim > 0.0)) throw InvalidArgument("plan_poc: d_lim must be > 0");
  if (!(dt_poc > 0.0)) throw InvalidArgument("plan_poc: dt_poc must be > 0");
  if (!(a_max > 0.0)) throw InvalidArgument("plan_poc: a_max must be > 0");
  if (!x_c.allFinite() || !v_c.allFinite()) throw InvalidArgument("plan_poc: non-finite input");
  const Vec3 v = v_c.head<3>();
  if (!(v.norm() > 1e-9)) throw InvalidArgument("plan_poc: zero catch speed");
  const double dt_min = v.cwiseAbs().maxCoeff() / a_max;
  if (dt_poc < dt_min) {
    throw InvalidArgument("plan_poc: dt_poc " + std::to_string(dt_poc) +
                          " s below the feasibility bound " + std::to_string(dt_min) + " s");
  }

  PocPlan p;
  p.x_c = x_c;
  p.v_c = v_c;
  p.d_lim = d_lim;
  p.dt_poc = dt_poc;
  p.x_f = x_c;
  p.x_f.head<3>() = poc_final_point(x_c.head<3>(), v, d_lim);
  const double T = dt_poc;
  for (int i = 0; i < 3; ++i) {
    const double dx = p.x_f(i) - x_c(i);
    p.coeffs(i, 0) = x_c(i);
    p.coeffs(i, 1) = v(i);
    p.coeffs(i, 2) = 3.0 * dx / (T * T) - 2.0 * v(i) / T;
    p.coeffs(i, 3) = -2.0 * dx / (T * T * T) + v(i) / (T * T);
    // Acceleration is linear in t, so its extremes are at the ends.
    const double a0 = 2.0 * p.coeffs(i, 2);
    const double a1 = a0 + 6.0 * p.coeffs(i, 3) * T;
    p.peak_accel = std::max({p.peak_accel, std::abs(a0), std::abs(a1)});
  }
  p.accel_within_limit = p.peak_accel <= a_max * (1.0 + 1e-12);
  return p;
}

PocSample sample_poc(const PocPlan& plan, double t) {
  const double s = std::clamp(t, 0.0, plan.dt_poc);
  PocSample out;
  out.x = plan.x_f;
  for (int i = 0; i < 3; ++i) {
    const auto c = plan.coeffs.row(i);
    out.x(i) = c(0) + s * (c(1) + s * (c(2) + s * c(3)));
    out.v(i) = c(1) + s * (2.0 * c(2) + s * 3.0 * c(3));
    out.a(i) = 2.0 * c(2) + 6.0 * c(3) * s;
  }
  if (t >= plan.dt_poc) {
    out.x.head<3>() = plan.x_f.head<3>();
    out.v.setZero();
    out.a.setZero();
  }
  return out;
}

double poc_distance(const PocPlan& plan, const Vec3& x_actual, double d_h) {
  return (x_actual - plan.x_c.head<3>()).norm() / plan.d_lim * d_h;
}

Mat3 scale_stiffness(const Mat3& K_d, const PocScaling& scaling) {
  if (!(scaling.K_d_max > 0.0)) throw InvalidArgument("PocScaling.K_d_max must be > 0");
  return K_d / scaling.K_d_max * scaling.K_p_max;
}

Mat3 filter_gain(const Mat3& K_new, const Mat3& K_prev, double epsilon) {
  return epsilon * K_new + (1.0 - epsilon) * K_prev;
}

PocStep poc_step(const PocPlan& plan, const StiffnessProfile& profile,
                 const Vec3& x_actual, const PocScaling& scaling,
                 const Mat3& K_prev, double t) {
  PocStep out;
  const PocSample ref = sample_poc(plan, t);
  out.x_d = ref.x;
  out.v_d = ref.v;
  out.delta_d = poc_distance(plan, x_actual, profile.d_h);
  const StiffnessQuery q = gmr_predict(profile, out.delta_d);
  out.K_d = q.K;
  out.extrapolated = q.extrapolated;
  out.K_p_raw = scale_stiffness(out.K_d, scaling);
  out.K_p = filter_gain(out.K_p_raw, K_prev, scaling.epsilon);
  out.K_p_diag = out.K_p.diagonal();
  Mat3 off = out.K_p;
  off.diagonal().setZero();
  out.off_diagonal_max = off.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace catchsim
