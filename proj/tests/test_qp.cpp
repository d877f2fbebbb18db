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
#include <cmath>
#include <limits>
#include <random>

#include "catchsim/qp.hpp"

namespace catchsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatX random_matrix(int r, int c, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatX m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

// Random strictly convex problem with a known interior point so the
// constraint set is nonempty.
QPProblem random_problem(int n, int m_eq, int m_in, std::mt19937& rng,
                         bool with_box) {
  std::uniform_real_distribution<double> u(0.2, 1.5);
  QPProblem p(n);
  const MatX B = random_matrix(n, n, rng);
  p.H = B * B.transpose() + MatX::Identity(n, n);
  p.g = 3.0 * random_matrix(n, 1, rng);
  const VecX x0 = 0.5 * random_matrix(n, 1, rng);
  p.A_eq = random_matrix(m_eq, n, rng);
  p.b_eq = p.A_eq * x0;
  p.A_in = random_matrix(m_in, n, rng);
  p.lb.resize(m_in);
  p.ub.resize(m_in);
  const VecX ax = p.A_in * x0;
  for (int i = 0; i < m_in; ++i) {
    p.lb[i] = (i % 3 == 2) ? -kInf : ax[i] - u(rng);
    p.ub[i] = (i % 3 == 1) ? kInf : ax[i] + u(rng);
  }
  if (with_box) {
    for (int i = 0; i < n; ++i) {
      p.var_lb[i] = x0[i] - u(rng);
      p.var_ub[i] = x0[i] + u(rng);
    }
  }
  return p;
}

// Independent oracle: accelerated projected gradient on the dual.
VecX dual_projected_gradient(const QPProblem& p, int iterations) {
  const int n = p.n();
  std::vector<VecX> rows;
  std::vector<double> rhs;
  std::vector<bool> free_sign;
  for (int i = 0; i < p.A_eq.rows(); ++i) {
    rows.push_back(p.A_eq.row(i).transpose());
    rhs.push_back(p.b_eq[i]);
    free_sign.push_back(true);
  }
  auto add = [&](const VecX& a, double lo, double hi) {
    if (std::isfinite(lo)) {
      rows.push_back(a);
      rhs.push_back(lo);
      free_sign.push_back(false);
    }
    if (std::isfinite(hi)) {
      rows.push_back(-a);
      rhs.push_back(-hi);
      free_sign.push_back(false);
    }
  };
  for (int i = 0; i < p.A_in.rows(); ++i) add(p.A_in.row(i).transpose(), p.lb[i], p.ub[i]);
  for (int i = 0; i < n; ++i) add(VecX::Unit(n, i), p.var_lb[i], p.var_ub[i]);
  const int m = static_cast<int>(rows.size());
  MatX C(m, n);
  VecX d(m);
  for (int i = 0; i < m; ++i) {
    C.row(i) = rows[i].transpose();
    d[i] = rhs[i];
  }
  const Eigen::LLT<MatX> llt(p.H);
  const MatX HiCt = llt.solve(MatX(C.transpose()));
  const double L = (C * HiCt).operatorNorm();
  auto project = [&](VecX l) {
    for (int i = 0; i < m; ++i)
      if (!free_sign[i]) l[i] = std::max(0.0, l[i]);
    return l;
  };
  VecX lam = VecX::Zero(m), y = lam;
  double t = 1.0;
  for (int k = 0; k < iterations; ++k) {
    const VecX x = llt.solve(VecX(C.transpose() * y - p.g));
    const VecX next = project(y + (d - C * x) / L);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - lam);
    lam = next;
    t = tn;
  }
  return llt.solve(VecX(C.transpose() * lam - p.g));
}

TEST(QpSolve, UnconstrainedMinimumNorm) {
  QPProblem p(3);
  p.H = MatX::Identity(3, 3);
  const QPResult r = qp_solve(p);
  EXPECT_EQ(r.status, QPStatus::kOptimal);
  EXPECT_LT(r.x.norm(), 1e-15);
}

TEST(QpSolve, ActiveUpperBoundByHand) {
  // min 1/2 (x - 1)^2 s.t. x <= 0.
  QPProblem p(1);
  p.H(0, 0) = 1.0;
  p.g[0] = -1.0;
  p.A_in = MatX::Ones(1, 1);
  p.lb = VecX::Constant(1, -kInf);
  p.ub = VecX::Zero(1);
  QPResult r = qp_solve(p);
  ASSERT_EQ(r.status, QPStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 0.0, 1e-15);
  EXPECT_NEAR(r.y_in[0], 1.0, 1e-15);
  // Same through a variable bound.
  QPProblem q(1);
  q.H(0, 0) = 1.0;
  q.g[0] = -1.0;
  q.var_ub[0] = 0.0;
  r = qp_solve(q);
  EXPECT_NEAR(r.x[0], 0.0, 1e-15);
  EXPECT_NEAR(r.y_var[0], 1.0, 1e-15);
}

TEST(QpSolve, MatchesDualProjectedGradient) {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 15; ++trial) {
    const QPProblem p = random_problem(5, trial % 2, 6, rng, trial % 3 != 0);
    const QPResult r = qp_solve(p);
    ASSERT_EQ(r.status, QPStatus::kOptimal);
    const VecX ref = dual_projected_gradient(p, 200000);
    EXPECT_LT((r.x - ref).cwiseAbs().maxCoeff(), 1e-5) << "trial " << trial;
  }
}

TEST(QpSolve, KktResidualsWithinTolerance) {
  std::mt19937 rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    const QPProblem p = random_problem(8, trial % 3, 12, rng, trial % 2 == 0);
    const QPResult r = qp_solve(p);
    ASSERT_EQ(r.status, QPStatus::kOptimal);
    EXPECT_LT(r.kkt.max(), 1e-7) << "trial " << trial;
  }
}

TEST(QpSolve, Deterministic) {
  std::mt19937 rng(107);
  const QPProblem p = random_problem(6, 1, 8, rng, true);
  const QPResult a = qp_solve(p);
  const QPResult b = qp_solve(p);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(QpSolve, WarmStartReproducesSolutionInFewerIterations) {
  std::mt19937 rng(109);
  for (int trial = 0; trial < 50; ++trial) {
    const QPProblem p = random_problem(7, 1, 10, rng, true);
    const QPResult cold = qp_solve(p);
    ASSERT_EQ(cold.status, QPStatus::kOptimal);
    const QPResult warm = qp_solve(p, &cold.active_set);
    ASSERT_EQ(warm.status, QPStatus::kOptimal);
    EXPECT_LT((warm.x - cold.x).norm(), 1e-9);
    EXPECT_LE(warm.iterations, cold.iterations);
  }
}

TEST(QpSolve, BadWarmStartStillSolves) {
  std::mt19937 rng(113);
  const QPProblem p = random_problem(6, 0, 8, rng, true);
  const QPResult cold = qp_solve(p);
  QPWarmStart w;
  for (int id = 0; id < 12; ++id) w.active.push_back(id);
  const QPResult r = qp_solve(p, &w);
  ASSERT_EQ(r.status, QPStatus::kOptimal);
  EXPECT_LT((r.x - cold.x).norm(), 1e-9);
}

TEST(QpSolve, DetectsInfeasibility) {
  QPProblem p(1);
  p.H(0, 0) = 1.0;
  p.var_lb[0] = 1.0;
  p.A_in = MatX::Ones(1, 1);
  p.lb = VecX::Constant(1, -kInf);
  p.ub = VecX::Zero(1);
  EXPECT_EQ(qp_solve(p).status, QPStatus::kInfeasible);
}

TEST(QpSolve, RejectsIndefiniteHessian) {
  QPProblem p(2);
  p.H << 1, 0, 0, -1;
  EXPECT_THROW(qp_solve(p), NumericalError);
  QPProblem q(2);
  q.H = MatX::Identity(3, 3);
  EXPECT_THROW(qp_solve(q), DimensionError);
}

TEST(QpSolve, DumpRoundTrip) {
  std::mt19937 rng(127);
  const QPProblem p = random_problem(4, 1, 5, rng, true);
  const QPProblem q = parse_qp_dump(dump_qp(p));
  EXPECT_EQ(qp_solve(p).x, qp_solve(q).x);
  EXPECT_TRUE(std::isinf(q.lb[2]));
}

TEST(SolveHierarchy, SingleLevelMatchesQpSolve) {
  std::mt19937 rng(131);
  QPProblem p = random_problem(5, 0, 6, rng, true);
  TaskStack s;
  s.constraints = p;
  s.levels.push_back({"task", p.H, p.g});
  const HierarchyResult h = solve_hierarchy(s);
  ASSERT_EQ(h.status, QPStatus::kOptimal);
  p.H += 1e-9 * MatX::Identity(5, 5);
  const QPResult r = qp_solve(p);
  // Strictly convex level: the regularizer level cannot move x beyond the
  // lock tolerance.
  EXPECT_LT((h.x - r.x).norm(), 1e-7);
}

TaskLevel row_task(const std::string& name, const VecX& a, double b) {
  // 1/2 (a'x - b)^2 without the constant.
  return {name, a * a.transpose(), -b * a};
}

TEST(SolveHierarchy, ConflictingRankOneObjectives) {
  TaskStack s;
  s.constraints = QPProblem(2);
  s.levels.push_back(row_task("sum", Eigen::Vector2d(1, 1), 2.0));
  s.levels.push_back(row_task("x1", Eigen::Vector2d(1, 0), 3.0));
  HierarchyResult h = solve_hierarchy(s);
  ASSERT_EQ(h.status, QPStatus::kOptimal);
  EXPECT_NEAR(h.x[0], 3.0, 1e-7);
  EXPECT_NEAR(h.x[1], -1.0, 1e-7);
  EXPECT_NEAR(h.x.sum(), 2.0, 2e-8);
  EXPECT_LE(h.objective_final[0], h.objective_at_level[0] + 1e-8);
  // A bound on x2 makes level 2 give way, not level 1.
  s.constraints.var_lb[1] = -0.5;
  h = solve_hierarchy(s);
  EXPECT_NEAR(h.x.sum(), 2.0, 2e-8);
  EXPECT_NEAR(h.x[0], 2.5, 1e-7);
  // Fully opposed: level 2 wants the same row at another value.
  TaskStack t;
  t.constraints = QPProblem(2);
  t.levels.push_back(row_task("sum", Eigen::Vector2d(1, 1), 2.0));
  t.levels.push_back(row_task("sum5", Eigen::Vector2d(1, 1), 5.0));
  h = solve_hierarchy(t);
  EXPECT_NEAR(h.x.sum(), 2.0, 2e-8);
  EXPECT_NEAR(h.x[0], 1.0, 1e-7);
  EXPECT_NEAR(h.x[1], 1.0, 1e-7);
}

TEST(SolveHierarchy, RegularizerOnlyGivesMinimumNorm) {
  TaskStack s;
  s.constraints = QPProblem(2);
  s.constraints.A_in = MatX::Ones(1, 2);
  s.constraints.lb = VecX::Constant(1, 2.0);
  s.constraints.ub = VecX::Constant(1, kInf);
  const HierarchyResult h = solve_hierarchy(s);
  ASSERT_EQ(h.status, QPStatus::kOptimal);
  EXPECT_NEAR(h.x[0], 1.0, 1e-12);
  EXPECT_NEAR(h.x[1], 1.0, 1e-12);
}

TEST(SolveHierarchy, LaterLevelsNeverWorsenEarlierOnes) {
  std::mt19937 rng(137);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 7;
    TaskStack s;
    s.constraints = random_problem(n, 0, 4, rng, true);
    const MatX A1 = random_matrix(3, n, rng);
    const MatX A2 = random_matrix(2, n, rng);
    const VecX b1 = 2.0 * random_matrix(3, 1, rng);
    const VecX b2 = 2.0 * random_matrix(2, 1, rng);
    s.levels.push_back({"one", A1.transpose() * A1, -A1.transpose() * b1});
    s.levels.push_back({"two", A2.transpose() * A2, -A2.transpose() * b2});
    const HierarchyResult h = solve_hierarchy(s);
    ASSERT_EQ(h.status, QPStatus::kOptimal);
    for (size_t k = 0; k + 1 < h.objective_final.size(); ++k) {
      EXPECT_LE(h.objective_final[k], h.objective_at_level[k] + 1e-8)
          << "trial " << trial << " level " << k << " diff " << h.objective_final[k] - h.objective_at_level[k];
    }
    for (const KktResiduals& r : h.kkt) EXPECT_LT(r.max(), 1e-7);
  }
}

TEST(SolveHierarchy, WarmStartedCascadeMatchesCold) {
  std::mt19937 rng(139);
  TaskStack s;
  s.constraints = random_problem(7, 0, 4, rng, true);
  const MatX A1 = random_matrix(3, 7, rng);
  s.levels.push_back({"one", A1.transpose() * A1, -A1.transpose() * VecX::Ones(3)});
  const HierarchyResult cold = solve_hierarchy(s);
  const HierarchyResult warm = solve_hierarchy(s, &cold.active_sets);
  EXPECT_LT((warm.x - cold.x).norm(), 1e-9);
  EXPECT_LE(warm.iterations, cold.iterations);
}

}  // namespace
}  // namespace catchsim
