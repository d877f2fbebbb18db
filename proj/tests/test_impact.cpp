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
#include <random>

#include "catchsim/impact.hpp"

namespace catchsim {
namespace {

Mat3 random_spd(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat3 a;
  for (int i = 0; i < 9; ++i) a(i) = n(rng);
  return a * a.transpose() + 0.1 * Mat3::Identity();
}

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

double post_relative(const ImpactResult& r, const Vec6& xr, const Vec3& xo,
                     const Vec3& u) {
  return (xr.head<3>() + r.dv_robot.head<3>() - xo - r.dv_object).dot(u);
}

TEST(ImpactImpulse, MatchedVelocitiesGiveNoImpulse) {
  Vec6 xr = Vec6::Zero();
  xr.head<3>() = Vec3(0.1, -0.2, -1.5);
  const ImpactResult r =
      impact_impulse(2.0 * Mat3::Identity(), xr, Vec3(0.1, -0.2, -1.5), {});
  EXPECT_EQ(r.impulse, 0.0);
  EXPECT_EQ(r.dv_robot.norm(), 0.0);
  EXPECT_EQ(r.dv_object.norm(), 0.0);
}

TEST(ImpactImpulse, RigidBaseAbsorbsObjectMomentum) {
  ImpactParams p;
  p.e = 0.0;
  p.m_o = 0.1;
  p.u = Vec3::UnitZ();
  const ImpactResult r =
      impact_impulse_mobility(Mat3::Zero(), Vec6::Zero(), -3.0 * p.u, p);
  EXPECT_NEAR(std::abs(r.impulse), 0.3, 1e-15);
  // The same limit approached through a very stiff Lambda_v.
  const ImpactResult r2 =
      impact_impulse(1e12 * Mat3::Identity(), Vec6::Zero(), -3.0 * p.u, p);
  EXPECT_NEAR(std::abs(r2.impulse), 0.3, 1e-10);
}

TEST(ImpactImpulse, RestitutionIdentity) {
  std::mt19937 rng(41);
  std::normal_distribution<double> n(0.0, 2.0);
  for (double e : {0.0, 0.25, 0.5, 1.0}) {
    for (int k = 0; k < 1000; ++k) {
      ImpactParams p;
      p.e = e;
      p.m_o = 0.05 + std::abs(n(rng));
      p.u = random_unit(rng);
      const Mat3 L = random_spd(rng);
      Vec6 xr;
      for (int i = 0; i < 6; ++i) xr[i] = n(rng);
      const Vec3 xo(n(rng), n(rng), n(rng));
      const ImpactResult r = impact_impulse(L, xr, xo, p);
      const double pre = (xr.head<3>() - xo).dot(p.u);
      EXPECT_NEAR(post_relative(r, xr, xo, p.u), -e * pre,
                  1e-10 * std::max(1.0, std::abs(pre)));
    }
  }
}

TEST(ImpactImpulse, MomentumBalance) {
  std::mt19937 rng(43);
  ImpactParams p;
  p.u = random_unit(rng);
  const Mat3 L = random_spd(rng);
  Vec6 xr = Vec6::Zero();
  xr.head<3>() = Vec3(0.2, 0.1, 0.4);
  const ImpactResult r = impact_impulse(L, xr, Vec3(0, 0, -2), p);
  EXPECT_NEAR(p.m_o * r.dv_object.dot(p.u), -r.impulse, 1e-14);
  EXPECT_LT((L * r.dv_robot.head<3>() - p.u * r.impulse).norm(), 1e-12);
  EXPECT_EQ(r.dv_robot.tail<3>().norm(), 0.0);
}

TEST(ImpactImpulse, LinearInRelativeVelocity) {
  std::mt19937 rng(47);
  ImpactParams p;
  p.u = random_unit(rng);
  const Mat3 L = random_spd(rng);
  const Vec3 xo = -2.0 * p.u;
  const double f1 = impact_impulse(L, Vec6::Zero(), xo, p).impulse;
  const double f2 = impact_impulse(L, Vec6::Zero(), 0.5 * xo, p).impulse;
  EXPECT_NEAR(f2, 0.5 * f1, 1e-14);
}

TEST(ImpactImpulse, DecreasesWithReflectedMass) {
  ImpactParams p;
  p.u = Vec3::UnitZ();
  double prev = std::numeric_limits<double>::infinity();
  for (double m_u : {10.0, 3.0, 1.0, 0.3, 0.1}) {
    const double f =
        std::abs(impact_impulse(m_u * Mat3::Identity(), Vec6::Zero(),
                                -2.0 * p.u, p).impulse);
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(ImpactImpulse, RejectsBadParameters) {
  ImpactParams p;
  p.e = 1.5;
  EXPECT_THROW(impact_impulse(Mat3::Identity(), Vec6::Zero(), Vec3::Zero(), p),
               InvalidArgument);
  p.e = 0.5;
  p.u = Vec3(0, 0, 2);
  EXPECT_THROW(impact_impulse(Mat3::Identity(), Vec6::Zero(), Vec3::Zero(), p),
               InvalidArgument);
  EXPECT_THROW(impact_impulse(Mat3::Zero(), Vec6::Zero(), Vec3::Zero(), {}),
               SingularError);
}

TEST(CompliantContact, Examples) {
  EXPECT_EQ(compliant_contact_force(0.0, 0.0, 5e4, 10.0), 0.0);
  EXPECT_NEAR(compliant_contact_force(1e-3, 0.0, 1e5, 10.0), 100.0, 1e-12);
  EXPECT_EQ(compliant_contact_force(-1e-3, 5.0, 1e5, 10.0), 0.0);
  // Separating fast: the damper would pull, the law does not.
  EXPECT_EQ(compliant_contact_force(1e-4, -10.0, 1e5, 10.0), 0.0);
}

TEST(CompliantContact, NeverNegative) {
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> d(-1e-2, 1e-2), r(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_GE(compliant_contact_force(d(rng), r(rng), 5e4, 20.0), 0.0);
  }
}

// Ball dropped on a fixed plane, integrated at 1e-5 s.
double simulated_bounce_ratio(double k, double d, double m, double h0) {
  const double g = 9.81, dt = 1e-5;
  double z = h0, v = 0.0, apex = 0.0;
  bool bounced = false;
  for (int i = 0; i < 2000000; ++i) {
    const double f = compliant_contact_force(-z, -v, k, d);
    v += dt * (f / m - g);
    z += dt * v;
    if (z < 0.0) bounced = true;
    if (bounced && z > 0.0) {
      apex = std::max(apex, z);
      if (v < 0.0) break;
    }
  }
  return apex / h0;
}

TEST(CompliantContact, BounceMatchesClosedFormRestitution) {
  const double k = 5e4, m = 0.1;
  for (double e : {0.3, 0.6, 0.9}) {
    const double d = calibrate_contact_damping(k, m, e);
    EXPECT_NEAR(contact_response(k, d, m).restitution, e, 1e-9);
    // Rebound height ratio is e^2 (gravity during the ~4 ms contact is a
    // small perturbation).
    EXPECT_NEAR(simulated_bounce_ratio(k, d, m, 0.32), e * e, 0.02);
  }
}

TEST(CompliantContact, ZeroDampingIsElastic) {
  const ContactResponse r = contact_response(5e4, 0.0, 0.1);
  EXPECT_NEAR(r.restitution, 1.0, 1e-12);
  EXPECT_NEAR(r.duration, M_PI * std::sqrt(0.1 / 5e4), 1e-15);
}

TEST(CompliantContact, CalibrationRejectsOutOfRange) {
  EXPECT_THROW(calibrate_contact_damping(5e4, 0.1, 1.0), InvalidArgument);
  EXPECT_THROW(calibrate_contact_damping(5e4, 0.1, 0.0), InvalidArgument);
}

}  // namespace
}  // namespace catchsim
