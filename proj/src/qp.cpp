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

#include "catchsim/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>

#include "catchsim/json_util.hpp"

namespace catchsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RowMajorMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One constraint n'x + c >= 0 (or = 0) with n = sign * (unit base row).
// Both sides of a two-sided row share the base.
struct Row {
  int base = 0;
  double sign = 1.0;
  double c = 0.0;
  double scale = 1.0;  // 1 / ||a|| of the original row
  int id = 0;          // external id (see QPWarmStart)
  bool equality = false;
};

// Normalized base rows. Variable bounds are unit rows and never stored.
struct RowSet {
  RowMajorMat dense;
  std::vector<int> unit;      // per base: variable index or -1
  std::vector<int> dense_at;  // per base: row of `dense` or -1
  std::vector<Row> rows;
  Eigen::Index used = 0;  // filled rows of `dense`

  int add_dense(const Eigen::Ref<const VecX>& a_unit) {
    const int base = static_cast<int>(unit.size());
    dense.row(used) = a_unit.transpose();
    unit.push_back(-1);
    dense_at.push_back(static_cast<int>(used++));
    return base;
  }
};

class DualActiveSet {
 public:
  DualActiveSet(const MatX& H, const VecX& g, RowSet set, const QPOptions& opt)
      : n_(static_cast<int>(g.size())), set_(std::move(set)), opt_(opt) {
    sparse_ = set_.dense.sparseView();
    bool diagonal = true;
    for (int j = 0; j < n_ && diagonal; ++j) {
      for (int i = 0; i < n_; ++i) {
        if (i != j && H(i, j) != 0.0) {
          diagonal = false;
          break;
        }
      }
    }
    if (diagonal) {
      if (!(H.diagonal().array() > 0.0).all()) {
        throw NumericalError("qp_solve: Hessian is not positive definite");
      }
      // Range-space form: factor N_W D^-1 N_W' over the active rows only.
      // Kept to well-conditioned diagonals; it loses accuracy otherwise.
      const double ratio = H.diagonal().maxCoeff() / H.diagonal().minCoeff();
      range_ = ratio <= 1e6;
      dinv_ = H.diagonal().cwiseInverse();
      if (!range_) J0_ = MatX(dinv_.cwiseSqrt().asDiagonal());
      x0_ = -g.cwiseProduct(dinv_);
    } else {
      const Eigen::LLT<MatX> llt(H);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("qp_solve: Hessian is not positive definite");
      }
      const MatX Linv = llt.matrixL().solve(MatX::Identity(n_, n_));
      J0_ = Linv.transpose();
      x0_ = -llt.solve(g);
    }
  }

  QPStatus solve(const QPWarmStart* warm) {
    if (warm != nullptr && !warm->active.empty()) {
      const QPStatus s = run(warm);
      if (s != QPStatus::kInfeasible || !warm_rejected_) return s;
    }
    return run(nullptr);
  }

  const VecX& x() const { return x_; }
  int iterations() const { return iterations_; }
  const std::vector<int>& active() const { return active_; }
  const std::vector<double>& multipliers() const { return u_; }
  const std::vector<Row>& rows() const { return set_.rows; }

 private:
  const Row& row(int i) const { return set_.rows[i]; }

  double row_dot(int i, const VecX& v) const {
    const Row& r = row(i);
    const int j = set_.unit[r.base];
    if (j >= 0) return r.sign * v[j];
    return r.sign * set_.dense.row(set_.dense_at[r.base]).dot(v);
  }

  // v += a * n_i
  void row_axpy(int i, double a, VecX* v) const {
    const Row& r = row(i);
    const int j = set_.unit[r.base];
    if (j >= 0) {
      (*v)[j] += a * r.sign;
    } else {
      *v += (a * r.sign) * set_.dense.row(set_.dense_at[r.base]).transpose();
    }
  }

  void row_vector(int i, VecX* out) const {
    out->setZero(n_);
    row_axpy(i, 1.0, out);
  }

  double slack(int i) const { return row_dot(i, x_) + row(i).c; }

  void reset() {
    if (range_) {
      if (S_.rows() != n_) {
        S_ = MatX::Zero(n_, n_);
        L_ = MatX::Zero(n_, n_);
      }
    } else {
      J_ = J0_;
      R_ = MatX::Zero(n_, n_);
    }
    x_ = x0_;
    iq_ = 0;
    active_.clear();
    u_.clear();
    in_active_.assign(set_.rows.size(), false);
    warm_rejected_ = false;
  }

  void step_direction(int p) {
    row_vector(p, &np_);
    if (range_) {
      w_ = dinv_.cwiseProduct(np_);
      sigma_ = np_.dot(w_);
      b_.resize(iq_);
      for (int k = 0; k < iq_; ++k) b_[k] = row_dot(active_[k], w_);
      y_ = L_.topLeftCorner(iq_, iq_).triangularView<Eigen::Lower>().solve(b_);
      r_ = L_.topLeftCorner(iq_, iq_)
               .transpose()
               .triangularView<Eigen::Upper>()
               .solve(y_);
      z_ = np_;
      for (int k = 0; k < iq_; ++k) row_axpy(active_[k], -r_[k], &z_);
      z_ = z_.cwiseProduct(dinv_);
      return;
    }
    d_.noalias() = J_.transpose() * np_;
    z_.noalias() = J_.rightCols(n_ - iq_) * d_.tail(n_ - iq_);
    if (iq_ > 0) {
      r_ = R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(
          d_.head(iq_));
    } else {
      r_.resize(0);
    }
  }

  // (J_a, J_b) <- (c J_a + s J_b, -s J_a + c J_b)
  void rotate_columns(int a, int b, double cc, double ss) {
    double* pa = J_.col(a).data();
    double* pb = J_.col(b).data();
    for (int k = 0; k < n_; ++k) {
      const double va = pa[k], vb = pb[k];
      pa[k] = cc * va + ss * vb;
      pb[k] = -ss * va + cc * vb;
    }
  }

  bool add_constraint() {
    if (range_) {
      if (iq_ >= n_) return false;
      const double schur = sigma_ - y_.squaredNorm();
      if (!(schur > 1e-13 * sigma_)) return false;
      S_.row(iq_).head(iq_) = b_.transpose();
      S_.col(iq_).head(iq_) = b_;
      S_(iq_, iq_) = sigma_;
      L_.row(iq_).head(iq_) = y_.transpose();
      L_(iq_, iq_) = std::sqrt(schur);
      ++iq_;
      return true;
    }
    for (int j = n_ - 1; j > iq_; --j) {
      const double a = d_[j - 1], b = d_[j];
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double cc = a / h, ss = b / h;
      d_[j - 1] = h;
      d_[j] = 0.0;
      rotate_columns(j - 1, j, cc, ss);
    }
    if (iq_ >= n_) return false;
    const double rnorm = std::max(1.0, R_.topLeftCorner(iq_, iq_).cwiseAbs().maxCoeff());
    if (std::abs(d_[iq_]) <= 1e-12 * rnorm) return false;
    R_.col(iq_).head(iq_ + 1) = d_.head(iq_ + 1);
    ++iq_;
    return true;
  }

  void delete_constraint(int l) {
    in_active_[active_[l]] = false;
    active_.erase(active_.begin() + l);
    u_.erase(u_.begin() + l);
    if (range_) {
      const int k = iq_ - 1;
      for (int j = l; j < k; ++j) {
        S_.row(j).head(iq_) = S_.row(j + 1).head(iq_);
      }
      for (int j = l; j < k; ++j) {
        S_.col(j).head(k) = S_.col(j + 1).head(k);
      }
      if (k > 0) {
        const Eigen::LLT<MatX> llt(S_.topLeftCorner(k, k));
        L_.topLeftCorner(k, k) = llt.matrixL();
      }
      --iq_;
      return;
    }
    for (int j = l; j < iq_ - 1; ++j) R_.col(j) = R_.col(j + 1);
    R_.col(iq_ - 1).setZero();
    for (int j = l; j < iq_ - 1; ++j) {
      const double a = R_(j, j), b = R_(j + 1, j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double cc = a / h, ss = b / h;
      for (int k = j; k < iq_ - 1; ++k) {
        const double rj = R_(j, k), rj1 = R_(j + 1, k);
        R_(j, k) = cc * rj + ss * rj1;
        R_(j + 1, k) = -ss * rj + cc * rj1;
      }
      R_(j + 1, j) = 0.0;
      rotate_columns(j, j + 1, cc, ss);
    }
    R_.row(iq_ - 1).setZero();
    --iq_;
  }

  // Most violated inactive inequality, or -1.
  int most_violated(double* smin) {
    bx_.noalias() = sparse_ * x_;
    const double tol = 1e-10 * (1.0 + x_.cwiseAbs().maxCoeff());
    int p = -1;
    *smin = 0.0;
    const int m = static_cast<int>(set_.rows.size());
    for (int i = 0; i < m; ++i) {
      const Row& r = set_.rows[i];
      if (r.equality || in_active_[i]) continue;
      const int j = set_.unit[r.base];
      const double v = j >= 0 ? x_[j] : bx_[set_.dense_at[r.base]];
      const double s = r.sign * v + r.c;
      if (s < -tol && s < *smin) {
        *smin = s;
        p = i;
      }
    }
    return p;
  }

  // Zero primal step means the row depends on the active set.
  bool nonzero_step() const {
    const double scale = range_ ? std::max(1.0, w_.norm()) : 1.0;
    return z_.norm() > 1e-12 * scale;
  }

  // Full step onto row i regardless of sign (equalities, warm start).
  // Returns false if the row is dependent on the active set.
  bool force_add(int i) {
    step_direction(i);
    const double zn = z_.dot(np_);
    if (!nonzero_step() || !(zn > 0.0)) return false;
    const double t = -slack(i) / zn;
    x_ += t * z_;
    for (int k = 0; k < iq_; ++k) u_[k] -= t * r_[k];
    if (!add_constraint()) return false;
    active_.push_back(i);
    u_.push_back(t);
    in_active_[i] = true;
    ++iterations_;
    return true;
  }

  QPStatus run(const QPWarmStart* warm) {
    reset();
    const int m = static_cast<int>(set_.rows.size());
    for (int i = 0; i < m; ++i) {
      if (!row(i).equality) continue;
      if (!force_add(i)) {
        if (std::abs(slack(i)) > 1e-9 * (1.0 + std::abs(row(i).c))) {
          return QPStatus::kInfeasible;
        }
      }
    }
    const int n_eq = iq_;
    if (warm != nullptr) {
      for (int id : warm->active) {
        for (int i = 0; i < m; ++i) {
          if (row(i).id == id && !row(i).equality && !in_active_[i]) {
            force_add(i);
            break;
          }
        }
      }
      for (int k = n_eq; k < iq_; ++k) {
        if (u_[k] < 0.0) {
          warm_rejected_ = true;
          return QPStatus::kInfeasible;
        }
      }
    }
    while (true) {
      double smin = 0.0;
      const int p = most_violated(&smin);
      if (p < 0) return QPStatus::kOptimal;
      double sp = smin;
      double u_plus = 0.0;
      while (true) {
        if (iterations_ >= opt_.max_iterations) return QPStatus::kMaxIterations;
        ++iterations_;
        step_direction(p);
        double t1 = kInf;
        int l = -1;
        for (int k = n_eq; k < iq_; ++k) {
          if (r_[k] > 1e-14) {
            const double t = u_[k] / r_[k];
            if (t < t1) {
              t1 = t;
              l = k;
            }
          }
        }
        const double zn = z_.dot(np_);
        const double t2 = (nonzero_step() && zn > 0.0) ? -sp / zn : kInf;
        const double t = std::min(t1, t2);
        if (t == kInf) return QPStatus::kInfeasible;
        for (int k = 0; k < iq_; ++k) u_[k] -= t * r_[k];
        u_plus += t;
        if (t2 == kInf) {
          delete_constraint(l);
          continue;
        }
        x_ += t * z_;
        sp += t * zn;
        if (t == t2) {
          if (!add_constraint()) return QPStatus::kInfeasible;
          active_.push_back(p);
          u_.push_back(u_plus);
          in_active_[p] = true;
          break;
        }
        delete_constraint(l);
      }
    }
  }

  int n_;
  RowSet set_;
  QPOptions opt_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
  MatX J0_;
  VecX x0_;
  bool range_ = false;
  VecX dinv_, w_, b_, y_;
  double sigma_ = 0.0;
  MatX S_, L_;
  MatX J_, R_;
  VecX x_, d_, z_, r_, np_, bx_;
  int iq_ = 0;
  std::vector<int> active_;
  std::vector<double> u_;
  std::vector<bool> in_active_;
  int iterations_ = 0;
  bool warm_rejected_ = false;
};

// Adds the normalized base row a and its finite sides.
void push_two_sided(RowSet* set, const Eigen::Ref<const VecX>& a, double lo,
                    double hi, int id_base, bool* trivially_infeasible) {
  const double norm = a.norm();
  if (norm == 0.0) {
    if (lo > 1e-9 || hi < -1e-9) *trivially_infeasible = true;
    return;
  }
  const int base = set->add_dense(a / norm);
  if (std::isfinite(lo)) {
    set->rows.push_back({base, 1.0, -lo / norm, 1.0 / norm, id_base, false});
  }
  if (std::isfinite(hi)) {
    set->rows.push_back({base, -1.0, hi / norm, 1.0 / norm, id_base + 1, false});
  }
}

void push_bounds(RowSet* set, int j, double lo, double hi, int id_base) {
  const int base = static_cast<int>(set->unit.size());
  set->unit.push_back(j);
  set->dense_at.push_back(-1);
  if (std::isfinite(lo)) {
    set->rows.push_back({base, 1.0, -lo, 1.0, id_base, false});
  }
  if (std::isfinite(hi)) {
    set->rows.push_back({base, -1.0, hi, 1.0, id_base + 1, false});
  }
}

}  // namespace

QPProblem::QPProblem(int n)
    : H(MatX::Zero(n, n)),
      g(VecX::Zero(n)),
      A_eq(0, n),
      b_eq(0),
      A_in(0, n),
      lb(0),
      ub(0),
      var_lb(VecX::Constant(n, -kInf)),
      var_ub(VecX::Constant(n, kInf)) {}

void QPProblem::validate() const {
  const Eigen::Index k = g.size();
  require_size(H.rows(), k, "QPProblem.H rows");
  require_size(H.cols(), k, "QPProblem.H cols");
  require_size(A_eq.cols(), k, "QPProblem.A_eq cols");
  require_size(b_eq.size(), A_eq.rows(), "QPProblem.b_eq");
  require_size(A_in.cols(), k, "QPProblem.A_in cols");
  require_size(lb.size(), A_in.rows(), "QPProblem.lb");
  require_size(ub.size(), A_in.rows(), "QPProblem.ub");
  require_size(var_lb.size(), k, "QPProblem.var_lb");
  require_size(var_ub.size(), k, "QPProblem.var_ub");
}

const char* to_string(QPStatus s) {
  switch (s) {
    case QPStatus::kOptimal:
      return "optimal";
    case QPStatus::kInfeasible:
      return "infeasible";
    case QPStatus::kMaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

KktResiduals kkt_residuals(const QPProblem& p, const VecX& x, const VecX& y_eq,
                           const VecX& y_in, const VecX& y_var) {
  KktResiduals r;
  VecX grad = p.H * x + p.g + y_var;
  if (p.A_eq.rows() > 0) grad += p.A_eq.transpose() * y_eq;
  if (p.A_in.rows() > 0) grad += p.A_in.transpose() * y_in;
  r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  auto side = [&r](double v, double lo, double hi, double y) {
    r.primal = std::max({r.primal, lo - v, v - hi});
    if (y > 0.0) {
      if (!std::isfinite(hi)) r.dual = std::max(r.dual, y);
      else r.complementarity = std::max(r.complementarity, y * std::abs(hi - v));
    } else if (y < 0.0) {
      if (!std::isfinite(lo)) r.dual = std::max(r.dual, -y);
      else r.complementarity = std::max(r.complementarity, -y * std::abs(v - lo));
    }
  };
  if (p.A_eq.rows() > 0) {
    r.primal = std::max(r.primal, (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff());
  }
  const VecX ax = p.A_in * x;
  for (Eigen::Index i = 0; i < ax.size(); ++i) side(ax[i], p.lb[i], p.ub[i], y_in[i]);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    side(x[i], p.var_lb[i], p.var_ub[i], y_var[i]);
  }
  return r;
}

QPResult qp_solve(const QPProblem& p, const QPWarmStart* warm,
                  const QPOptions& options) {
  p.validate();
  const int n = p.n();
  const int m_in = static_cast<int>(p.A_in.rows());
  RowSet set;
  const int eq_count = static_cast<int>(p.A_eq.rows());
  set.dense.resize(eq_count + m_in, n);
  bool trivially_infeasible = false;
  for (int i = 0; i < eq_count; ++i) {
    const double norm = p.A_eq.row(i).norm();
    if (norm == 0.0) {
      if (std::abs(p.b_eq[i]) > 1e-9) trivially_infeasible = true;
      continue;
    }
    const int base = set.add_dense(p.A_eq.row(i).transpose() / norm);
    set.rows.push_back({base, 1.0, -p.b_eq[i] / norm, 1.0 / norm, i, true});
  }
  for (int i = 0; i < m_in; ++i) {
    push_two_sided(&set, p.A_in.row(i).transpose(), p.lb[i], p.ub[i],
                   eq_count + 2 * i, &trivially_infeasible);
  }
  for (int i = 0; i < n; ++i) {
    push_bounds(&set, i, p.var_lb[i], p.var_ub[i], eq_count + 2 * m_in + 2 * i);
  }
  set.dense.conservativeResize(set.used, Eigen::NoChange);
  QPResult res;
  res.y_eq = VecX::Zero(p.A_eq.rows());
  res.y_in = VecX::Zero(m_in);
  res.y_var = VecX::Zero(n);
  if (trivially_infeasible) {
    res.x = VecX::Zero(n);
    res.status = QPStatus::kInfeasible;
    return res;
  }
  DualActiveSet solver(p.H, p.g, std::move(set), options);
  res.status = solver.solve(warm);
  res.x = solver.x();
  res.iterations = solver.iterations();
  const auto& r = solver.rows();
  for (size_t k = 0; k < solver.active().size(); ++k) {
    const Row& row = r[solver.active()[k]];
    const double u = solver.multipliers()[k] * row.scale;
    res.active_set.active.push_back(row.id);
    if (row.equality) {
      res.y_eq[row.id] = -u;
      continue;
    }
    const int local = row.id - eq_count;
    const bool upper = (local % 2) == 1;
    const double y = upper ? u : -u;
    if (local < 2 * m_in) {
      res.y_in[local / 2] += y;
    } else {
      res.y_var[(local - 2 * m_in) / 2] += y;
    }
  }
  res.kkt = kkt_residuals(p, res.x, res.y_eq, res.y_in, res.y_var);
  res.objective = 0.5 * res.x.dot(p.H * res.x) + p.g.dot(res.x);
  return res;
}

namespace {

json bounds_to_json(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) a.push_back(v[i]);
    else a.push_back(nullptr);
  }
  return a;
}

VecX bounds_from_json(const json& j, double missing, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected array");
  VecX v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null()) v[i] = missing;
    else if (j[i].is_number()) v[i] = j[i].get<double>();
    else throw ParseError(where + ": expected number or null");
  }
  return v;
}

MatX matrix_from_json(const json& j, Eigen::Index cols, const std::string& where) {
  if (j.is_array() && j.empty()) return MatX(0, cols);
  return json_matx(j, where);
}

}  // namespace

std::string dump_qp(const QPProblem& p) {
  json j;
  j["format_version"] = 1;
  j["H"] = mat_to_json(p.H);
  j["g"] = vec_to_json(p.g);
  j["A_eq"] = mat_to_json(p.A_eq);
  j["b_eq"] = vec_to_json(p.b_eq);
  j["A_in"] = mat_to_json(p.A_in);
  j["lb"] = bounds_to_json(p.lb);
  j["ub"] = bounds_to_json(p.ub);
  j["var_lb"] = bounds_to_json(p.var_lb);
  j["var_ub"] = bounds_to_json(p.var_ub);
  return j.dump(1) + "\n";
}

QPProblem parse_qp_dump(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("qp dump: ") + e.what());
  }
  const VecX g = json_vecx(json_required_node(j, "g", "qp dump"), "g");
  QPProblem p(static_cast<int>(g.size()));
  p.g = g;
  p.H = json_matx(json_required_node(j, "H", "qp dump"), "H");
  p.A_eq = matrix_from_json(json_required_node(j, "A_eq", "qp dump"), g.size(), "A_eq");
  p.b_eq = json_vecx(json_required_node(j, "b_eq", "qp dump"), "b_eq");
  p.A_in = matrix_from_json(json_required_node(j, "A_in", "qp dump"), g.size(), "A_in");
  p.lb = bounds_from_json(json_required_node(j, "lb", "qp dump"), -kInf, "lb");
  p.ub = bounds_from_json(json_required_node(j, "ub", "qp dump"), kInf, "ub");
  p.var_lb = bounds_from_json(json_required_node(j, "var_lb", "qp dump"), -kInf, "var_lb");
  p.var_ub = bounds_from_json(json_required_node(j, "var_ub", "qp dump"), kInf, "var_ub");
  p.validate();
  return p;
}

namespace {

double level_objective(const MatX& H, const VecX& g, const VecX& x) {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

// Rows spanning the directions the level objective depends on.
MatX lock_rows(const MatX& H, const VecX& g) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (H + H.transpose()));
  const VecX& ev = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<VecX> rows;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff) rows.push_back(es.eigenvectors().col(i));
  }
  VecX g_perp = g;
  for (const VecX& r : rows) g_perp -= r.dot(g) * r;
  if (g_perp.norm() > 1e-12 * std::max(1.0, g.norm())) {
    rows.push_back(g_perp.normalized());
  }
  MatX out(rows.size(), H.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = rows[i].transpose();
  return out;
}

}  // namespace

HierarchyResult solve_hierarchy(const TaskStack& stack,
                                const std::vector<QPWarmStart>* warm,
                                const QPOptions& options) {
  const int n = stack.levels.empty()
                    ? stack.constraints.n()
                    : static_cast<int>(stack.levels[0].g.size());
  QPProblem cons = stack.constraints;
  if (cons.n() == 0) cons = QPProblem(n);
  require_size(cons.n(), n, "solve_hierarchy: constraints");
  std::vector<TaskLevel> levels = stack.levels;
  levels.push_back({"regularizer", MatX::Identity(n, n), VecX::Zero(n)});
  HierarchyResult out;
  out.x = VecX::Zero(n);
  for (size_t k = 0; k < levels.size(); ++k) {
    const TaskLevel& L = levels[k];
    require_size(L.H.rows(), n, "solve_hierarchy: level H");
    require_size(L.g.size(), n, "solve_hierarchy: level g");
    QPProblem p = cons;
    p.H = L.H + stack.regularization * MatX::Identity(n, n);
    p.g = L.g;
    const QPWarmStart* w =
        (warm != nullptr && k < warm->size()) ? &(*warm)[k] : nullptr;
    const QPResult r = qp_solve(p, w, options);
    out.iterations += r.iterations;
    out.active_sets.push_back(r.active_set);
    out.kkt.push_back(r.kkt);
    if (r.status != QPStatus::kOptimal) {
      out.status = r.status;
      out.failed_level = static_cast<int>(k);
      return out;
    }
    out.x = r.x;
    out.objective_at_level.push_back(level_objective(L.H, L.g, r.x));
    if (k + 1 == levels.size()) break;
    const MatX A = lock_rows(L.H, L.g);
    if (A.rows() == 0) continue;
    // Band per row sized so that sliding to its edge costs at most
    // half of lock_tolerance in objective units over all rows together
    // (the rest covers second-order and rounding terms).
    const VecX ax = A * r.x;
    const VecX slope = A * (L.H * r.x + L.g);
    const Eigen::Index rows = A.rows();
    VecX band(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      band[i] = 0.5 * stack.lock_tolerance /
                (static_cast<double>(rows) * std::max(1.0, std::abs(slope[i])));
    }
    const Eigen::Index m0 = cons.A_in.rows();
    cons.A_in.conservativeResize(m0 + rows, n);
    cons.A_in.bottomRows(rows) = A;
    cons.lb.conservativeResize(m0 + rows);
    cons.ub.conservativeResize(m0 + rows);
    cons.lb.tail(rows) = ax - band;
    cons.ub.tail(rows) = ax + band;
  }
  for (const TaskLevel& L : levels) {
    out.objective_final.push_back(level_objective(L.H, L.g, out.x));
  }
  return out;
}

}  // namespace catchsim
