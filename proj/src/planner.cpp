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

#include "catchsim/planner.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace catchsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PlanResult empty_plan(const Vec6& x_now, double now, PlanStatus status) {
  PlanResult r;
  r.status = status;
  r.t0 = now;
  r.v_traj = MatX::Zero(6, 0);
  r.x_traj = x_now;
  return r;
}

void integrate(const Vec6& x_now, PlanResult* r) {
  r->x_traj.resize(6, r->T_p + 1);
  r->x_traj.col(0) = x_now;
  for (int k = 0; k < r->T_p; ++k) {
    r->x_traj.col(k + 1) = r->x_traj.col(k) + r->dt_p * r->v_traj.col(k);
  }
}

// Rows of the first-difference operator, first row against v_now.
void add_acceleration_rows(QPProblem* p, int T, double dt, double v0,
                           double a_max) {
  const Eigen::Index base = p->A_in.rows();
  p->A_in.conservativeResize(base + T, T);
  p->lb.conservativeResize(base + T);
  p->ub.conservativeResize(base + T);
  p->A_in.bottomRows(T).setZero();
  for (int k = 0; k < T; ++k) {
    p->A_in(base + k, k) = 1.0;
    if (k > 0) p->A_in(base + k, k - 1) = -1.0;
    const double c = k == 0 ? v0 : 0.0;
    p->lb(base + k) = c - dt * a_max;
    p->ub(base + k) = c + dt * a_max;
  }
}

// Cumulative-sum rows for samples 1..rows (x_k - x0 = dt sum_{j<k} v_j).
// Rows whose bounds cannot be reached are left out: with |v| <= v_max the
// displacement after k samples lies in reach[k] = [lo_k, hi_k].
void add_position_rows(QPProblem* p, int T, int rows, double dt, double lo,
                       double hi, const std::vector<std::pair<double, double>>*
                                      reach = nullptr) {
  std::vector<int> keep;
  for (int k = 0; k < rows; ++k) {
    if (reach != nullptr && (*reach)[k].first >= lo &&
        (*reach)[k].second <= hi) {
      continue;
    }
    keep.push_back(k);
  }
  const Eigen::Index base = p->A_in.rows();
  const Eigen::Index count = static_cast<Eigen::Index>(keep.size());
  p->A_in.conservativeResize(base + count, T);
  p->lb.conservativeResize(base + count);
  p->ub.conservativeResize(base + count);
  p->A_in.bottomRows(count).setZero();
  for (Eigen::Index r = 0; r < count; ++r) {
    p->A_in.row(base + r).head(keep[r] + 1).setConstant(dt);
    p->lb(base + r) = lo;
    p->ub(base + r) = hi;
  }
}

MatX cumulative(int T) {
  return MatX::Ones(T, T).triangularView<Eigen::Lower>();
}

}  // namespace

void PlannerLimits::validate() const {
  if (!(v_lin_max > 0.0 && v_ang_max > 0.0 && a_lin_max > 0.0 &&
        a_ang_max > 0.0)) {
    throw InvalidArgument("PlannerLimits: velocity and acceleration maxima "
                          "must be positive");
  }
  for (int i = 0; i < 6; ++i) {
    if (!(x_min[i] < x_max[i])) {
      throw InvalidArgument("PlannerLimits: x_min must be below x_max (row " +
                            std::to_string(i) + ")");
    }
  }
}

Vec6 PlannerLimits::v_max() const {
  Vec6 v;
  v << Vec3::Constant(v_lin_max), Vec3::Constant(v_ang_max);
  return v;
}

Vec6 PlannerLimits::a_max() const {
  Vec6 a;
  a << Vec3::Constant(a_lin_max), Vec3::Constant(a_ang_max);
  return a;
}

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kSolved:
      return "solved";
    case PlanStatus::kInfeasible:
      return "infeasible";
    case PlanStatus::kDegenerateHorizon:
      return "degenerate_horizon";
  }
  return "unknown";
}

VecX PlanResult::stacked_velocity() const {
  return Eigen::Map<const VecX>(v_traj.data(), v_traj.size());
}

VecX PlanResult::stacked_position() const {
  const MatX tail = x_traj.rightCols(T_p);
  return Eigen::Map<const VecX>(tail.data(), tail.size());
}

VmTarget vm_target(const CatchPrediction& prediction, const Vec3& orientation) {
  VmTarget t;
  t.x << prediction.x_at_tc, orientation;
  t.v << prediction.v_at_tc, Vec3::Zero();
  t.t_c = prediction.t_c;
  return t;
}

QPProblem vm_axis_problem(double x0, double v0, double displacement_target,
                          double v_target, int T, double dt, double x_lo,
                          double x_hi, double v_max, double a_max) {
  QPProblem p(T);
  p.H = kPlanRegularization * MatX::Identity(T, T);
  p.H(T - 1, T - 1) += 1.0;
  p.g.setZero();
  p.g(T - 1) = -v_target;
  p.A_eq = MatX::Constant(1, T, dt);
  p.b_eq = VecX::Constant(1, displacement_target);
  p.A_in.resize(0, T);
  // Displacement after k + 1 samples is reachable from both the start and
  // (backwards) from the target.
  std::vector<std::pair<double, double>> reach(T);
  for (int k = 0; k < T; ++k) {
    const double fwd = (k + 1) * dt * v_max;
    const double bwd = (T - k - 1) * dt * v_max;
    reach[k] = {std::max(-fwd, displacement_target - bwd),
                std::min(fwd, displacement_target + bwd)};
  }
  // The last position row coincides with the equality and is left out.
  add_position_rows(&p, T, T - 1, dt, x_lo - x0, x_hi - x0, &reach);
  add_acceleration_rows(&p, T, dt, v0, a_max);
  p.var_lb = VecX::Constant(T, -v_max);
  p.var_ub = VecX::Constant(T, v_max);
  return p;
}

PlanResult plan_vm(const Vec6& x_now, const Vec6& v_now, const VmTarget& target,
                   double now, const PlannerLimits& limits, double dt_p) {
  limits.validate();
  if (!(dt_p > 0.0)) throw InvalidArgument("plan_vm: dt_p must be positive");
  const auto start = std::chrono::steady_clock::now();
  const double horizon = target.t_c - now;
  const long T_round = std::lround(horizon / dt_p);
  if (!(horizon > 0.0) || T_round < 1) {
    return empty_plan(x_now, now, PlanStatus::kDegenerateHorizon);
  }
  PlanResult r;
  r.t0 = now;
  r.T_p = static_cast<int>(std::min<long>(T_round, kMaxPlanSamples));
  r.dt_p = horizon / r.T_p;
  const int T = r.T_p;
  const double dt = r.dt_p;
  const Vec6 vmax = limits.v_max();
  const Vec6 amax = limits.a_max();

  auto fail = [&](const char* what) {
    PlanResult f = empty_plan(x_now, now, PlanStatus::kInfeasible);
    f.T_p = 0;
    f.dt_p = dt;
    f.violated = what;
    return f;
  };

  if (((target.x - limits.x_min).array() < 0.0).any() ||
      ((limits.x_max - target.x).array() < 0.0).any()) {
    return fail("position");
  }

  r.v_traj = MatX::Zero(6, T);
  for (int i = 0; i < 6; ++i) {
    const double D = target.x[i] - x_now[i];
    const bool inside =
        x_now[i] >= limits.x_min[i] && x_now[i] <= limits.x_max[i];
    if (D == 0.0 && target.v[i] == 0.0 && v_now[i] == 0.0 && inside) continue;
    const QPProblem p =
        vm_axis_problem(x_now[i], v_now[i], D, target.v[i], T, dt,
                        limits.x_min[i], limits.x_max[i], vmax[i], amax[i]);
    const QPResult s = qp_solve(p);
    r.iterations += s.iterations;
    if (s.status != QPStatus::kOptimal) {
      if (std::abs(D) > T * dt * vmax[i] * (1.0 + 1e-12)) {
        return fail("velocity");
      }
      if (!inside) return fail("position");
      return fail("acceleration");
    }
    r.v_traj.row(i) = s.x.transpose();
  }
  integrate(x_now, &r);
  r.objective = 0.5 * (r.v_traj.col(T - 1) - target.v).squaredNorm();
  r.status = PlanStatus::kSolved;
  r.solve_seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return r;
}

PlanResult plan_vm(const Vec6& x_now, const Vec6& v_now,
                   const CatchPrediction& prediction, double now,
                   const PlannerLimits& limits, double dt_p) {
  if (!prediction.valid) {
    throw InvalidArgument("plan_vm: catch prediction is not valid");
  }
  return plan_vm(x_now, v_now, vm_target(prediction, x_now.tail<3>()), now,
                 limits, dt_p);
}

MatX soft_axis_hessian(int T, double dt, const SoftWeights& w, double select) {
  const MatX S = cumulative(T);
  return w.alpha * MatX::Identity(T, T) +
         dt * dt * (w.beta - w.gamma * select) * (S.transpose() * S);
}

PlanResult plan_soft_legacy(const Vec6& x_now, const Vec6& v_now,
                            const ObjectTrajectory& object,
                            const SoftWeights& weights, const Vec6& selector,
                            const PlannerLimits& limits, double dt) {
  limits.validate();
  if (!(dt > 0.0)) throw InvalidArgument("plan_soft_legacy: dt must be positive");
  if (weights.alpha < 0.0 || weights.beta < 0.0 || weights.gamma < 0.0) {
    throw InvalidArgument("plan_soft_legacy: weights must be non-negative");
  }
  const int T = static_cast<int>(object.x_obj.cols());
  if (object.x_obj.rows() != 6 || object.v_obj.rows() != 6 ||
      object.v_obj.cols() != T) {
    throw DimensionError("plan_soft_legacy: object trajectory must be 6 x T");
  }
  if (T < 1) return empty_plan(x_now, 0.0, PlanStatus::kDegenerateHorizon);
  const auto start = std::chrono::steady_clock::now();
  const MatX S = cumulative(T);
  const Vec6 vmax = limits.v_max();
  const Vec6 amax = limits.a_max();

  PlanResult r;
  r.T_p = T;
  r.dt_p = dt;
  r.v_traj = MatX::Zero(6, T);
  double cost = 0.0;
  for (int i = 0; i < 6; ++i) {
    QPProblem p(T);
    p.H = soft_axis_hessian(T, dt, weights, selector[i]);
    const Eigen::SelfAdjointEigenSolver<MatX> eig(p.H,
                                                  Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lo > 1e-12 * hi)) {
      throw NumericalError("plan_soft_legacy: Hessian is not positive "
                           "definite on axis " + std::to_string(i) +
                           " (min eigenvalue " + std::to_string(lo) + ")");
    }
    const VecX base = VecX::Constant(T, x_now[i]);
    const VecX xo = object.x_obj.row(i).transpose();
    const VecX vo = object.v_obj.row(i).transpose();
    const double sel = selector[i];
    p.g = -weights.alpha * vo +
          weights.beta * dt * S.transpose() * (base - xo) -
          weights.gamma * sel * dt * S.transpose() * base;
    p.A_in.resize(0, T);
    add_position_rows(&p, T, T, dt, limits.x_min[i] - x_now[i],
                      limits.x_max[i] - x_now[i]);
    add_acceleration_rows(&p, T, dt, v_now[i], amax[i]);
    p.var_lb = VecX::Constant(T, -vmax[i]);
    p.var_ub = VecX::Constant(T, vmax[i]);
    const QPResult s = qp_solve(p);
    r.iterations += s.iterations;
    if (s.status != QPStatus::kOptimal) {
      PlanResult f = empty_plan(x_now, 0.0, PlanStatus::kInfeasible);
      f.violated = std::abs(x_now[i] - std::clamp(x_now[i], limits.x_min[i],
                                                  limits.x_max[i])) > 0.0
                       ? "position"
                       : "acceleration";
      return f;
    }
    r.v_traj.row(i) = s.x.transpose();
    const VecX x = base + dt * S * s.x;
    cost += 0.5 * (weights.alpha * (s.x - vo).squaredNorm() +
                   weights.beta * (x - xo).squaredNorm() -
                   weights.gamma * sel * x.squaredNorm());
  }
  integrate(x_now, &r);
  r.objective = cost;
  r.status = PlanStatus::kSolved;
  r.solve_seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return r;
}

double legacy_catch_height(const PlanResult& plan,
                           const ObjectTrajectory& object) {
  if (plan.status != PlanStatus::kSolved || plan.T_p < 1) {
    throw InvalidArgument("legacy_catch_height: plan is not solved");
  }
  int best = 0;
  double best_gap = kInf;
  for (int k = 0; k < plan.T_p; ++k) {
    const double gap = std::abs(plan.x_traj(2, k + 1) - object.x_obj(2, k));
    if (gap < best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  return plan.x_traj(2, best + 1);
}

void sample_plan(const PlanResult& plan, double t, Vec6* x, Vec6* v) {
  if (plan.T_p < 1) {
    if (x != nullptr) *x = plan.x_traj.col(0);
    if (v != nullptr) v->setZero();
    return;
  }
  const double span = plan.T_p * plan.dt_p;
  const double tau = std::clamp(t - plan.t0, 0.0, span);
  int k = static_cast<int>(std::floor(tau / plan.dt_p));
  k = std::clamp(k, 0, plan.T_p - 1);
  const double s = tau - k * plan.dt_p;
  if (x != nullptr) {
    *x = plan.x_traj.col(k) + s * plan.v_traj.col(k);
  }
  if (v != nullptr) {
    const int k1 = std::min(k + 1, plan.T_p - 1);
    const double w = s / plan.dt_p;
    *v = (1.0 - w) * plan.v_traj.col(k) + w * plan.v_traj.col(k1);
  }
}

ReferenceStream resample_plan(const PlanResult& plan, double dt_ctrl) {
  if (!(dt_ctrl > 0.0)) {
    throw InvalidArgument("resample_plan: dt_ctrl must be positive");
  }
  if (plan.T_p >= 1 && dt_ctrl > plan.dt_p * (1.0 + 1e-12)) {
    throw InvalidArgument("resample_plan: dt_ctrl exceeds the plan period");
  }
  ReferenceStream out;
  const double span = plan.T_p * plan.dt_p;
  long n = std::lround(std::floor(span / dt_ctrl + 1e-9)) + 1;
  const bool extra = (n - 1) * dt_ctrl < span - 1e-12;
  const long total = n + (extra ? 1 : 0);
  out.t.resize(total);
  out.x.resize(6, total);
  out.v.resize(6, total);
  for (long j = 0; j < total; ++j) {
    const bool last = j == total - 1;
    // Knot times are hit exactly when dt_ctrl divides dt_p.
    double tau = last ? span : j * dt_ctrl;
    if (plan.T_p >= 1) {
      const double knots = tau / plan.dt_p;
      const double nearest = std::round(knots);
      if (std::abs(knots - nearest) < 1e-9) tau = nearest * plan.dt_p;
    }
    out.t[j] = plan.t0 + tau;
    Vec6 x, v;
    if (plan.T_p >= 1) {
      const int k = std::clamp(
          static_cast<int>(std::lround(tau / plan.dt_p)), 0, plan.T_p);
      if (std::abs(tau - k * plan.dt_p) == 0.0) {
        // On a knot: copy it exactly.
        x = plan.x_traj.col(k);
        v = plan.v_traj.col(std::min(k, plan.T_p - 1));
      } else {
        sample_plan(plan, plan.t0 + tau, &x, &v);
      }
    } else {
      sample_plan(plan, plan.t0, &x, &v);
    }
    out.x.col(j) = x;
    out.v.col(j) = v;
  }
  return out;
}

}  // namespace catchsim
