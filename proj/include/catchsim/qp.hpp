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

// Dense strictly convex QP (Goldfarb-Idnani dual active set) and the
// strict-priority task cascade built on it.
//
//   min  1/2 x'Hx + g'x
//   s.t. A_eq x = b_eq,  lb <= A_in x <= ub,  var_lb <= x <= var_ub
//
// Infinite bounds are allowed and simply omitted. Multipliers follow
//   H x + g + A_eq' y_eq + A_in' y_in + y_var = 0,
// with y_in, y_var >= 0 at an active upper bound and <= 0 at a lower one.

#pragma once

#include <string>
#include <vector>

#include "catchsim/common.hpp"

namespace catchsim {

struct QPProblem {
  MatX H;
  VecX g;
  MatX A_eq;
  VecX b_eq;
  MatX A_in;
  VecX lb, ub;
  VecX var_lb, var_ub;

  // Empty constraint blocks are resized to n columns / zero rows.
  explicit QPProblem(int n = 0);
  int n() const { return static_cast<int>(g.size()); }
  void validate() const;
};

enum class QPStatus { kOptimal, kInfeasible, kMaxIterations };

const char* to_string(QPStatus s);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max() const;
};

// Active constraint ids from a previous solve. Ids: equalities 0..meq-1,
// then 2i / 2i+1 for lower / upper side of A_in row i, then the same for
// variable bounds (offset by 2 * rows of A_in).
struct QPWarmStart {
  std::vector<int> active;
};

struct QPOptions {
  int max_iterations = 4000;
  double kkt_tolerance = 1e-7;
};

struct QPResult {
  VecX x;
  QPStatus status = QPStatus::kInfeasible;
  int iterations = 0;
  KktResiduals kkt;
  VecX y_eq, y_in, y_var;
  QPWarmStart active_set;
  double objective = 0.0;
};

// Throws NumericalError if H is not positive definite and DimensionError on
// inconsistent shapes. Infeasibility and iteration limits are statuses.
QPResult qp_solve(const QPProblem& p, const QPWarmStart* warm = nullptr,
                  const QPOptions& options = {});

KktResiduals kkt_residuals(const QPProblem& p, const VecX& x, const VecX& y_eq,
                           const VecX& y_in, const VecX& y_var);

// Problem dump for offline debugging (JSON; infinities written as null).
std::string dump_qp(const QPProblem& p);
QPProblem parse_qp_dump(const std::string& text);

struct TaskLevel {
  std::string name;
  MatX H;  // PSD
  VecX g;
};

struct TaskStack {
  std::vector<TaskLevel> levels;  // highest priority first
  QPProblem constraints;          // H and g unused
  double lock_tolerance = 1e-8;
  double regularization = 1e-9;
};

struct HierarchyResult {
  VecX x;
  QPStatus status = QPStatus::kOptimal;
  int failed_level = -1;
  int iterations = 0;
  // Per level (task levels, then the implicit min-norm level): objective
  // 1/2 x'H x + g'x right after that level's solve and at the final x.
  std::vector<double> objective_at_level;
  std::vector<double> objective_final;
  std::vector<QPWarmStart> active_sets;
  std::vector<KktResiduals> kkt;
};

// Cascade: each level is solved with H_k + reg I subject to the shared
// constraints and the task values of all earlier levels locked within
// lock_tolerance; a final level minimizes ||x||^2.
HierarchyResult solve_hierarchy(const TaskStack& stack,
                                const std::vector<QPWarmStart>* warm = nullptr,
                                const QPOptions& options = {});

}  // namespace catchsim
