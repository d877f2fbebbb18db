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

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "catchsim/controller.hpp"

namespace catchsim {
namespace {

VecX ready_pose() {
  VecX q(7);
  q << 0.0, -0.3, 0.0, -2.2, 0.0, 2.0, 0.785;
  return q;
}

ControlGains gains7() {
  ControlGains g;
  g.K_p = Vec6::Constant(40.0);
  g.K_v = Vec6::Constant(0.5);
  g.K_qp = VecX::Constant(7, 600.0);
  g.K_qd = VecX::Constant(7, 20.0);
  return g;
}

ControlRefs refs_at(const ArmModel& m, const VecX& q) {
  const CartesianState c = forward_kinematics(m, q);
  ControlRefs r;
  r.position = c.position;
  r.orientation = c.orientation;
  return r;
}

Vec6 down() {
  Vec6 u = Vec6::Zero();
  u(2) = -1.0;
  return u;
}

class Controller : public ::testing::Test {
 protected:
  ArmModel model_ = default_arm_model();
};

TEST_F(Controller, ZeroErrorGivesZeroRates) {
  const VecX q = ready_pose();
  const JointState s{q, VecX::Zero(7), VecX()};
  const TaskLevel t = clik_objective(model_, s, refs_at(model_, q), gains7());
  EXPECT_LE(t.g.norm(), 1e-12);
  const ControlTick tick =
      control_tick(model_, s, {q, VecX::Zero(7)}, refs_at(model_, q), gains7(), {});
  EXPECT_FALSE(tick.safe_stop);
  EXPECT_LE(tick.dq_star.norm(), 1e-9);
}

TEST_F(Controller, PureVerticalErrorTarget) {
  const VecX q = ready_pose();
  CartesianState actual = forward_kinematics(model_, q);
  ControlRefs r = refs_at(model_, q);
  r.position.z() += 0.02;
  ControlGains g = gains7();
  g.K_p(2) = 35.0;
  const Vec6 t = clik_target(r, actual, g);
  Vec6 want = Vec6::Zero();
  want(2) = 35.0 * 0.02;
  EXPECT_LE((t - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(Controller, UnconstrainedClikIsMinimumNormSolution) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    VecX q = ready_pose();
    for (int i = 0; i < 7; ++i) q(i) += u(rng);
    const Mat6X J = jacobian(model_, q);
    Vec6 target;
    for (int i = 0; i < 6; ++i) target(i) = u(rng);
    TaskStack stack;
    stack.levels.push_back(clik_objective(J, target));
    stack.constraints = QPProblem(7);
    const HierarchyResult r = solve_hierarchy(stack);
    ASSERT_EQ(r.status, QPStatus::kOptimal);
    // Damped normal equations with the cascade's regularizer as damping.
    const MatX JJt = J * J.transpose() + stack.regularization * MatX::Identity(6, 6);
    const VecX oracle = J.transpose() * JJt.ldlt().solve(target);
    EXPECT_LE((r.x - oracle).norm(), 1e-8 * (1.0 + oracle.norm()));
  }
}

TEST_F(Controller, DimObjectiveZeroGradient) {
  const TaskLevel t = dim_objective(3.0, VecX::Zero(7), 1e-3);
  EXPECT_EQ(t.H, MatX::Zero(7, 7));
  EXPECT_EQ(t.g, VecX::Zero(7));
}

TEST_F(Controller, DimMinimizerFollowsGradientOnTwoLinkArm) {
  const ArmModel arm = make_planar_arm({0.4, 0.3}, {1.0, 0.5});
  VecX q(2);
  q << 0.3, 1.1;
  Vec6 u = Vec6::Zero();
  u(0) = 1.0;
  const double dt = 1e-3;
  const TaskLevel t = dim_objective(arm, q, u, dt);
  const VecX grad = dim_gradient(arm, q, u);
  ASSERT_GT(grad.norm(), 1e-6);
  TaskStack stack;
  stack.levels.push_back(t);
  stack.constraints = QPProblem(2);
  const HierarchyResult r = solve_hierarchy(stack);
  ASSERT_EQ(r.status, QPStatus::kOptimal);
  EXPECT_NEAR(r.x.normalized().dot(grad.normalized()), 1.0, 1e-9);
  // Rank-1 closed form with the cascade's regularizer r:
  // (dt^2 g g^T + r I) dq = w dt g  =>  g^T dq = w dt |g|^2 / (dt^2 |g|^2 + r).
  const double w = dim_index(arm, q, u);
  const double g2 = grad.squaredNorm();
  const double want = w * dt * g2 / (dt * dt * g2 + stack.regularization);
  EXPECT_NEAR(grad.dot(r.x), want, 1e-6 * want);
}

TEST_F(Controller, DimObjectiveValueBySubstitution) {
  const VecX q = ready_pose();
  const double dt = 1e-3;
  const TaskLevel t = dim_objective(model_, q, down(), dt);
  const VecX grad = dim_gradient(model_, q, down());
  const double w = dim_index(model_, q, down());
  const VecX dq = grad.normalized();
  const double value = 0.5 * dq.dot(t.H * dq) + t.g.dot(dq);
  const double n = grad.norm();
  EXPECT_NEAR(value, 0.5 * dt * dt * n * n - w * dt * n, 1e-12 * (1.0 + std::abs(value)));
}

TEST_F(Controller, JointLimitBounds) {
  VecX q = ready_pose();
  q(3) = model_.q_max(3);
  const JointConstraintBlock b = joint_constraints(model_, q, VecX::Zero(7), 1e-3);
  EXPECT_LE(b.hi(3), 0.0);

  ArmModel m = model_;
  m.ddq_max = VecX::Constant(7, 10.0);
  const JointConstraintBlock s = joint_constraints(m, ready_pose(), VecX::Zero(7), 1e-3);
  for (int i = 0; i < 7; ++i) {
    EXPECT_NEAR(s.hi(i), 0.01, 1e-15);
    EXPECT_NEAR(s.lo(i), -0.01, 1e-15);
  }
}

TEST_F(Controller, JointBoundsReEvaluated) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    VecX q(7), dq(7);
    for (int i = 0; i < 7; ++i) {
      q(i) = model_.q_min(i) + unit(rng) * (model_.q_max(i) - model_.q_min(i));
      dq(i) = sym(rng) * model_.dq_max(i);
    }
    const double dt = 1e-3 * (0.5 + unit(rng));
    const JointConstraintBlock b = joint_constraints(model_, q, dq, dt);
    for (int i = 0; i < 7; ++i) {
      const double lo = std::max({(model_.q_min(i) - q(i)) / dt, -model_.dq_max(i),
                                  dq(i) - model_.ddq_max(i) * dt});
      const double hi = std::min({(model_.q_max(i) - q(i)) / dt, model_.dq_max(i),
                                  dq(i) + model_.ddq_max(i) * dt});
      const bool relaxed =
          std::find(b.relaxed.begin(), b.relaxed.end(), i) != b.relaxed.end();
      EXPECT_EQ(relaxed, lo > hi);
      if (lo > hi) continue;
      EXPECT_EQ(b.lo(i), lo);
      EXPECT_EQ(b.hi(i), hi);
    }
  }
}

TEST_F(Controller, OutsideLimitsRelaxesTowardTheBox) {
  VecX q = ready_pose();
  q(0) = model_.q_max(0) + 0.1;
  const JointConstraintBlock b = joint_constraints(model_, q, VecX::Zero(7), 1e-3);
  ASSERT_EQ(b.relaxed.size(), 1u);
  EXPECT_EQ(b.relaxed[0], 0);
  EXPECT_DOUBLE_EQ(b.lo(0), b.hi(0));
  EXPECT_DOUBLE_EQ(b.hi(0), -model_.ddq_max(0) * 1e-3);
}

TEST_F(Controller, PerfectTrackingLeavesFeedForwardTorque) {
  const VecX q = ready_pose();
  const JointState s{q, VecX::Zero(7), VecX()};
  ControlOptions o;
  o.torque_clamp = false;
  const ControlTick tick =
      control_tick(model_, s, {q, VecX::Zero(7)}, refs_at(model_, q), gains7(), o);
  const VecX want = coriolis_vector(model_, q, s.dq) + gravity_vector(model_, q);
  EXPECT_LE((tick.tau - want).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(Controller, DimStaysInClikNullspace) {
  const VecX q = ready_pose();
  const JointState s{q, VecX::Zero(7), VecX()};
  ControlOptions o;
  o.dim_enabled = true;
  o.u = down();
  const ControlTick tick =
      control_tick(model_, s, {q, VecX::Zero(7)}, refs_at(model_, q), gains7(), o);
  ASSERT_FALSE(tick.safe_stop);
  EXPECT_GT(tick.dq_star.norm(), 1e-6);
  EXPECT_LE((jacobian(model_, q) * tick.dq_star).norm(), 1e-7);
  EXPECT_EQ(tick.level_objectives.size(), 3u);
}

TEST_F(Controller, DimDoesNotDisturbClik) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  ControlOptions o;
  o.dim_enabled = true;
  o.u = down();
  o.compare_without_dim = true;
  for (int trial = 0; trial < 30; ++trial) {
    VecX q = ready_pose();
    VecX dq(7);
    for (int i = 0; i < 7; ++i) {
      q(i) += u(rng);
      dq(i) = u(rng);
    }
    ControlRefs r = refs_at(model_, q);
    r.position += Vec3(u(rng), u(rng), u(rng)) * 0.05;
    r.twist.head<3>() = Vec3(u(rng), u(rng), u(rng));
    const ControlTick tick =
        control_tick(model_, {q, dq, VecX()}, {q, dq}, r, gains7(), o);
    ASSERT_FALSE(tick.safe_stop);
    ASSERT_GE(tick.clik_residual_no_dim, 0.0);
    EXPECT_LE(std::abs(tick.clik_residual - tick.clik_residual_no_dim), 1e-7);
  }
}

// Gradient of w projected on the 1-D self-motion of the arm, oriented
// along dq (or along the gradient when at rest).
double self_motion_slope(const ArmModel& m, const VecX& q, const VecX& dq, const Vec6& u) {
  const Mat6X J = jacobian(m, q);
  Eigen::FullPivLU<MatX> lu(J);
  VecX n = lu.kernel().col(0).normalized();
  const VecX grad = dim_gradient(m, q, u);
  if (dq.norm() > 1e-12 ? n.dot(dq) < 0.0 : n.dot(grad) < 0.0) n = -n;
  return grad.dot(n);
}

TEST_F(Controller, DimAscendsWhileHolding) {
  VecX q = ready_pose();
  q(0) += 0.5;
  q(2) -= 0.6;
  VecX dq = VecX::Zero(7);
  ControlOptions o;
  o.dim_enabled = true;
  o.u = down();
  double prev = dim_index(model_, q, down());
  const double start = prev;
  int steps = 0;
  for (int k = 0; k < 1000; ++k) {
    // Stop at the constrained stationary point along the self-motion.
    if (self_motion_slope(model_, q, dq, down()) <= 0.0) break;
    const ControlTick tick =
        control_tick(model_, {q, dq, VecX()}, {q, dq}, refs_at(model_, q), gains7(), o);
    ASSERT_FALSE(tick.safe_stop);
    q = tick.q_star;
    dq = tick.dq_star;
    const double w = dim_index(model_, q, down());
    if (w - prev < -1e-9) {
      // Only the step that crosses the stationary point may lose ground.
      EXPECT_LE(self_motion_slope(model_, q, dq, down()), 0.0) << "tick " << k;
      break;
    }
    prev = w;
    ++steps;
  }
  EXPECT_GT(steps, 10);
  EXPECT_GT(prev, start);
}

TEST_F(Controller, IntegratedReferenceRespectsJointLimits) {
  VecX q = ready_pose();
  q(3) = model_.q_max(3) - 0.01;
  VecX dq = VecX::Zero(7);
  ControlRefs r = refs_at(model_, q);
  r.position += Vec3(0.3, 0.0, 0.3);  // pulls the elbow straight
  for (int k = 0; k < 400; ++k) {
    const ControlTick tick =
        control_tick(model_, {q, dq, VecX()}, {q, dq}, r, gains7(), {});
    ASSERT_FALSE(tick.safe_stop);
    EXPECT_TRUE(((tick.q_star - model_.q_max).array() <= 1e-6).all());
    EXPECT_TRUE(((model_.q_min - tick.q_star).array() <= 1e-6).all());
    EXPECT_TRUE(((tick.dq_star.cwiseAbs() - model_.dq_max).array() <= 1e-7).all());
    q = tick.q_star;
    dq = tick.dq_star;
  }
}

TEST_F(Controller, TorqueClampReportsJoints) {
  VecX q = ready_pose();
  ControlRefs r = refs_at(model_, q);
  VecX q_off = q;
  q_off(4) += 0.2;  // large joint error on a 12 N m joint
  ControlGains g = gains7();
  const ControlTick tick =
      control_tick(model_, {q, VecX::Zero(7), VecX()}, {q_off, VecX::Zero(7)}, r, g, {});
  ASSERT_FALSE(tick.clamped_joints.empty());
  EXPECT_NE(std::find(tick.clamped_joints.begin(), tick.clamped_joints.end(), 4),
            tick.clamped_joints.end());
  for (int i = 0; i < 7; ++i) EXPECT_LE(std::abs(tick.tau(i)), model_.tau_lim(i));
  EXPECT_GT(std::abs(tick.tau_unclamped(4)), 12.0);
}

TEST(TorqueLock, NeedsMoreThanFiveMilliseconds) {
  TorqueLockMonitor m(7);
  for (int k = 0; k < 5; ++k) EXPECT_FALSE(m.update({5}, 1e-3));
  EXPECT_FALSE(m.update({}, 1e-3));
  for (int k = 0; k < 5; ++k) EXPECT_FALSE(m.update({5}, 1e-3));
  EXPECT_TRUE(m.update({5}, 1e-3));
  EXPECT_EQ(m.joint(), 5);
  EXPECT_TRUE(m.update({}, 1e-3));  // latched
}

TEST_F(Controller, NonFiniteReferenceSafeStops) {
  const VecX q = ready_pose();
  ControlRefs r = refs_at(model_, q);
  r.position.x() = std::numeric_limits<double>::quiet_NaN();
  const ControlTick tick =
      control_tick(model_, {q, VecX::Zero(7), VecX()}, {q, VecX::Zero(7)}, r, gains7(), {});
  EXPECT_TRUE(tick.safe_stop);
  EXPECT_FALSE(tick.event.empty());
  EXPECT_EQ(tick.dq_star, VecX::Zero(7));
  EXPECT_LE((tick.tau - gravity_vector(model_, q)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(Controller, TickFitsKilohertzBudget) {
  VecX q = ready_pose();
  VecX dq = VecX::Zero(7);
  ControlOptions o;
  o.dim_enabled = true;
  o.u = down();
  ControlRefs r = refs_at(model_, q);
  r.twist(2) = -0.5;
  std::vector<double> t;
  for (int k = 0; k < 200; ++k) {
    r.position.z() -= 0.5e-3;
    const auto t0 = std::chrono::steady_clock::now();
    const ControlTick tick = control_tick(model_, {q, dq, VecX()}, {q, dq}, r, gains7(), o);
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    q = tick.q_star;
    dq = tick.dq_star;
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  EXPECT_LE(t[t.size() / 2], 1e-3);
}

TEST_F(Controller, RejectsBadGains) {
  ControlGains g = gains7();
  g.K_qp(2) = 0.0;
  EXPECT_THROW(g.validate(7), InvalidArgument);
  g = gains7();
  EXPECT_THROW(g.validate(6), DimensionError);
}

}  // namespace
}  // namespace catchsim
