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

#include "catchsim/impact.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace catchsim {

void ImpactParams::validate() const {
  if (!(e >= 0.0 && e <= 1.0)) throw InvalidArgument("impact: e must be in [0, 1]");
  if (!(m_o > 0.0)) throw InvalidArgument("impact: m_o must be > 0");
  if (std::abs(u.norm() - 1.0) > 1e-9) {
    throw InvalidArgument("impact: u must be a unit vector");
  }
}

ImpactResult impact_impulse_mobility(const Mat3& Lambda_v_inv,
                                     const Vec6& robot_twist,
                                     const Vec3& object_vel,
                                     const ImpactParams& params) {
  params.validate();
  const Vec3& u = params.u;
  const double rel = (robot_twist.head<3>() - object_vel).dot(u);
  const double denom = u.dot(Lambda_v_inv * u) + 1.0 / params.m_o;
  ImpactResult r;
  r.impulse = -(1.0 + params.e) * rel / denom;
  r.dv_robot.head<3>() = Lambda_v_inv * u * r.impulse;
  r.dv_object = -u * r.impulse / params.m_o;
  return r;
}

ImpactResult impact_impulse(const Mat3& Lambda_v, const Vec6& robot_twist,
                            const Vec3& object_vel, const ImpactParams& params) {
  const Eigen::LLT<Mat3> llt(Lambda_v);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(Lambda_v);
    const double lo = es.eigenvalues().minCoeff();
    throw SingularError("impact_impulse: Lambda_v not positive definite",
                        lo > 0.0 ? es.eigenvalues().maxCoeff() / lo
                                 : std::numeric_limits<double>::infinity());
  }
  return impact_impulse_mobility(llt.solve(Mat3::Identity()), robot_twist,
                                 object_vel, params);
}

double compliant_contact_force(double penetration, double penetration_rate,
                               double k_c, double d_c) {
  if (penetration <= 0.0) return 0.0;
  return std::max(0.0, k_c * penetration + d_c * penetration_rate);
}

ContactResponse contact_response(double k_c, double d_c, double mass) {
  if (!(k_c > 0.0) || !(d_c >= 0.0) || !(mass > 0.0)) {
    throw InvalidArgument("contact_response: k_c, mass > 0 and d_c >= 0");
  }
  const double sigma = d_c / (2.0 * mass);
  const double w2 = k_c / mass - sigma * sigma;
  if (!(w2 > 0.0)) {
    throw InvalidArgument("contact_response: contact is not underdamped");
  }
  const double w = std::sqrt(w2);
  // For unit entry speed, delta = e^{-st} sin(wt) / w and the force is
  // e^{-st} [((k - d s) / w) sin(wt) + d cos(wt)], zero at wt = pi - phi.
  const double phi = std::atan2(d_c, (k_c - d_c * sigma) / w);
  const double t_sep = (M_PI - phi) / w;
  ContactResponse r;
  r.duration = t_sep;
  r.restitution = std::exp(-sigma * t_sep) *
                  std::abs(std::cos(w * t_sep) - sigma / w * std::sin(w * t_sep));
  // Peak penetration where the rate vanishes: tan(wt) = w / s.
  const double t_peak = std::atan2(w, sigma) / w;
  r.max_penetration_per_speed = std::exp(-sigma * t_peak) * std::sin(w * t_peak) / w;
  return r;
}

double calibrate_contact_damping(double k_c, double mass, double e) {
  if (!(e > 0.0 && e < 1.0)) {
    throw InvalidArgument("calibrate_contact_damping: e must be in (0, 1)");
  }
  // Restitution decreases monotonically with damping over the underdamped
  // range; bisect on d.
  double lo = 0.0;
  double hi = 2.0 * std::sqrt(k_c * mass) * (1.0 - 1e-9);
  if (contact_response(k_c, hi, mass).restitution > e) {
    throw InvalidArgument("calibrate_contact_damping: e not reachable");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contact_response(k_c, mid, mass).restitution > e) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace catchsim
