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

#include "catchsim/kinematics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace catchsim {

namespace {

// Spatial vectors inside this file use Featherstone ordering
// (angular; linear). Only the public Jacobian/wrench API is (linear;
// angular).
using SVec = Eigen::Matrix<double, 6, 1>;
using SMat = Eigen::Matrix<double, 6, 6>;

// Parent-to-child coordinate transform: E rotates parent coordinates into
// child coordinates, r is the child origin in parent coordinates.
struct Xform {
  Mat3 E;
  Vec3 r;

  SVec motion(const SVec& m) const {
    SVec out;
    const Vec3 w = m.head<3>();
    out.head<3>() = E * w;
    out.tail<3>() = E * (m.tail<3>() - r.cross(w));
    return out;
  }

  // Child force expressed in parent coordinates (X^T f).
  SVec force_to_parent(const SVec& f) const {
    SVec out;
    const Vec3 fl = E.transpose() * f.tail<3>();
    out.tail<3>() = fl;
    out.head<3>() = E.transpose() * f.head<3>() + r.cross(fl);
    return out;
  }

  SMat matrix() const {
    SMat x = SMat::Zero();
    x.topLeftCorner<3, 3>() = E;
    x.bottomRightCorner<3, 3>() = E;
    x.bottomLeftCorner<3, 3>() = -E * skew(r);
    return x;
  }
};

Xform joint_xform(const LinkParams& p, double q) {
  const double th = q + p.theta_offset;
  const Mat3 R = (Eigen::AngleAxisd(p.alpha, Vec3::UnitX()) *
                  Eigen::AngleAxisd(th, Vec3::UnitZ()))
                     .toRotationMatrix();
  const double ca = std::cos(p.alpha), sa = std::sin(p.alpha);
  Xform x;
  x.E = R.transpose();
  x.r = Vec3(p.a, -sa * p.d, ca * p.d);
  return x;
}

SMat spatial_inertia(const LinkParams& p) {
  const Mat3 cx = skew(p.com);
  SMat I;
  I.topLeftCorner<3, 3>() = p.inertia + p.mass * cx * cx.transpose();
  I.topRightCorner<3, 3>() = p.mass * cx;
  I.bottomLeftCorner<3, 3>() = p.mass * cx.transpose();
  I.bottomRightCorner<3, 3>() = p.mass * Mat3::Identity();
  return I;
}

SVec cross_motion(const SVec& v, const SVec& u) {
  SVec out;
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  out.head<3>() = w.cross(u.head<3>());
  out.tail<3>() = w.cross(u.tail<3>()) + vl.cross(u.head<3>());
  return out;
}

SVec cross_force(const SVec& v, const SVec& f) {
  SVec out;
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  out.head<3>() = w.cross(f.head<3>()) + vl.cross(f.tail<3>());
  out.tail<3>() = w.cross(f.tail<3>());
  return out;
}

void check_q(const ArmModel& model, const VecX& q, const char* what) {
  require_size(q.size(), model.n_dof(), what);
}

VecX rnea(const ArmModel& model, const VecX& q, const VecX& dq,
          const VecX& ddq, const Vec3& gravity) {
  const int n = model.n_dof();
  const std::vector<LinkParams> links = model.lumped_links();
  std::vector<Xform> X(n);
  std::vector<SVec> v(n), a(n), f(n);
  SVec v_prev = SVec::Zero();
  SVec a_prev = SVec::Zero();
  a_prev.tail<3>() = -gravity;
  for (int i = 0; i < n; ++i) {
    X[i] = joint_xform(links[i], q[i]);
    SVec s = SVec::Zero();
    s[2] = 1.0;
    v[i] = X[i].motion(v_prev) + s * dq[i];
    a[i] = X[i].motion(a_prev) + s * ddq[i] + cross_motion(v[i], s * dq[i]);
    const SMat I = spatial_inertia(links[i]);
    f[i] = I * a[i] + cross_force(v[i], I * v[i]);
    v_prev = v[i];
    a_prev = a[i];
  }
  VecX tau(n);
  for (int i = n - 1; i >= 0; --i) {
    tau[i] = f[i][2];
    if (i > 0) f[i - 1] += X[i].force_to_parent(f[i]);
  }
  return tau;
}

Mat3X translational_rows(const Mat6X& J) { return J.topRows<3>(); }

}  // namespace

std::vector<Eigen::Isometry3d> joint_frames(const ArmModel& model,
                                            const VecX& q) {
  check_q(model, q, "joint_frames: q");
  std::vector<Eigen::Isometry3d> frames;
  frames.reserve(model.n_dof());
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  for (int i = 0; i < model.n_dof(); ++i) {
    const LinkParams& p = model.links[i];
    T = T * Eigen::AngleAxisd(p.alpha, Vec3::UnitX()) *
        Eigen::Translation3d(p.a, 0.0, 0.0) *
        Eigen::AngleAxisd(q[i] + p.theta_offset, Vec3::UnitZ()) *
        Eigen::Translation3d(0.0, 0.0, p.d);
    frames.push_back(T);
  }
  return frames;
}

Eigen::Isometry3d tool_pose(const ArmModel& model, const VecX& q) {
  return joint_frames(model, q).back() * model.tool;
}

CartesianState forward_kinematics(const ArmModel& model, const VecX& q) {
  const Eigen::Isometry3d T = tool_pose(model, q);
  CartesianState s;
  s.position = T.translation();
  s.orientation = Quat(T.rotation()).normalized();
  return s;
}

CartesianState forward_kinematics(const ArmModel& model, const VecX& q,
                                  const VecX& dq) {
  require_size(dq.size(), model.n_dof(), "forward_kinematics: dq");
  CartesianState s = forward_kinematics(model, q);
  s.twist = jacobian(model, q) * dq;
  return s;
}

Mat6X jacobian(const ArmModel& model, const VecX& q) {
  const std::vector<Eigen::Isometry3d> frames = joint_frames(model, q);
  const Vec3 p_tool = (frames.back() * model.tool).translation();
  const int n = model.n_dof();
  Mat6X J(6, n);
  for (int i = 0; i < n; ++i) {
    const Vec3 z = frames[i].linear().col(2);
    const Vec3 o = frames[i].translation();
    J.block<3, 1>(0, i) = z.cross(p_tool - o);
    J.block<3, 1>(3, i) = z;
  }
  return J;
}

MatX joint_inertia(const ArmModel& model, const VecX& q) {
  check_q(model, q, "joint_inertia: q");
  const int n = model.n_dof();
  const std::vector<LinkParams> links = model.lumped_links();
  std::vector<Xform> X(n);
  std::vector<SMat> Ic(n);
  for (int i = 0; i < n; ++i) {
    X[i] = joint_xform(links[i], q[i]);
    Ic[i] = spatial_inertia(links[i]);
  }
  for (int i = n - 1; i > 0; --i) {
    const SMat Xm = X[i].matrix();
    Ic[i - 1] += Xm.transpose() * Ic[i] * Xm;
  }
  MatX M(n, n);
  for (int i = 0; i < n; ++i) {
    SVec F = Ic[i].col(2);  // Ic * S with S = e_z (angular)
    M(i, i) = F[2];
    for (int j = i; j > 0; --j) {
      F = X[j].force_to_parent(F);
      M(i, j - 1) = F[2];
      M(j - 1, i) = F[2];
    }
  }
  return M;
}

VecX inverse_dynamics(const ArmModel& model, const VecX& q, const VecX& dq,
                      const VecX& ddq, bool with_gravity) {
  check_q(model, q, "inverse_dynamics: q");
  require_size(dq.size(), model.n_dof(), "inverse_dynamics: dq");
  require_size(ddq.size(), model.n_dof(), "inverse_dynamics: ddq");
  return rnea(model, q, dq, ddq, with_gravity ? model.gravity : Vec3::Zero());
}

VecX coriolis_vector(const ArmModel& model, const VecX& q, const VecX& dq) {
  check_q(model, q, "coriolis_vector: q");
  require_size(dq.size(), model.n_dof(), "coriolis_vector: dq");
  return rnea(model, q, dq, VecX::Zero(model.n_dof()), Vec3::Zero());
}

VecX gravity_vector(const ArmModel& model, const VecX& q) {
  check_q(model, q, "gravity_vector: q");
  const VecX z = VecX::Zero(model.n_dof());
  return rnea(model, q, z, z, model.gravity);
}

MatX damped_spd_inverse(const MatX& a, double damping, double* condition) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (a + a.transpose()));
  const VecX s = es.eigenvalues().cwiseMax(0.0);
  if (condition != nullptr) {
    const double smax = s.maxCoeff();
    const double smin = s.minCoeff();
    *condition = smin > 0.0 ? smax / smin
                            : std::numeric_limits<double>::infinity();
  }
  VecX inv(s.size());
  for (int i = 0; i < s.size(); ++i) {
    inv[i] = s[i] / (s[i] * s[i] + damping * damping);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

MatX damped_pinv(const MatX& a, double damping) {
  const double l2 = damping * damping;
  if (a.rows() <= a.cols()) {
    const MatX g = a * a.transpose() + l2 * MatX::Identity(a.rows(), a.rows());
    return a.transpose() * g.ldlt().solve(MatX::Identity(a.rows(), a.rows()));
  }
  const MatX g = a.transpose() * a + l2 * MatX::Identity(a.cols(), a.cols());
  return g.ldlt().solve(a.transpose());
}

DynamicsEval dynamics(const ArmModel& model, const JointState& state) {
  check_q(model, state.q, "dynamics: q");
  require_size(state.dq.size(), model.n_dof(), "dynamics: dq");
  DynamicsEval e;
  e.M = joint_inertia(model, state.q);
  e.C_vec = coriolis_vector(model, state.q, state.dq);
  e.g_vec = gravity_vector(model, state.q);
  e.J = jacobian(model, state.q);
  const Eigen::LLT<MatX> llt(e.M);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("dynamics: joint inertia not positive definite");
  }
  const MatX MinvJt = llt.solve(MatX(e.J.transpose()));
  const MatX A = e.J * MinvJt;
  double cond = 1.0;
  e.Lambda = damped_spd_inverse(A, kPinvDamping, &cond);
  e.condition = cond;
  e.near_singular = !(cond <= kNearSingularCondition);
  const MatX Av = A.topLeftCorner(3, 3);
  e.Lambda_v = damped_spd_inverse(Av, kPinvDamping, nullptr);
  return e;
}

VecX forward_dynamics(const ArmModel& model, const VecX& q, const VecX& dq,
                      const VecX& tau, const Vec6& tool_wrench) {
  check_q(model, q, "forward_dynamics: q");
  require_size(dq.size(), model.n_dof(), "forward_dynamics: dq");
  require_size(tau.size(), model.n_dof(), "forward_dynamics: tau");
  const VecX z = VecX::Zero(model.n_dof());
  const VecX bias = rnea(model, q, dq, z, model.gravity);
  VecX rhs = tau - bias;
  if (!tool_wrench.isZero(0.0)) rhs += jacobian(model, q).transpose() * tool_wrench;
  const Eigen::LLT<MatX> llt(joint_inertia(model, q));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("forward_dynamics: joint inertia not positive definite");
  }
  return llt.solve(rhs);
}

double reflected_mass(const ArmModel& model, const VecX& q, const Vec3& u) {
  check_q(model, q, "reflected_mass: q");
  if (std::abs(u.norm() - 1.0) > 1e-6) {
    throw InvalidArgument("reflected_mass: u must be a unit vector");
  }
  const Mat3X Jv = translational_rows(jacobian(model, q));
  const Eigen::LLT<MatX> llt(joint_inertia(model, q));
  const MatX A = Jv * llt.solve(MatX(Jv.transpose()));
  const double a = u.dot(A * u);
  const double scale = std::max(A.norm(), 1e-300);
  if (!(a > 1e-10 * scale)) {
    Eigen::SelfAdjointEigenSolver<MatX> es(A);
    const double smin = std::max(es.eigenvalues().minCoeff(), 0.0);
    const double cond = smin > 0.0 ? es.eigenvalues().maxCoeff() / smin
                                   : std::numeric_limits<double>::infinity();
    throw SingularError("reflected_mass: tool cannot move along u", cond);
  }
  return 1.0 / a;
}

double dim_index(const ArmModel& model, const VecX& q, const Vec6& u) {
  check_q(model, q, "dim_index: q");
  const MatX Jp = damped_pinv(jacobian(model, q));
  const VecX y = joint_inertia(model, q).transpose() * (Jp * u);
  return y.squaredNorm();
}

double dim_index_translational(const ArmModel& model, const VecX& q,
                               const Vec3& u) {
  check_q(model, q, "dim_index_translational: q");
  const MatX Jp = damped_pinv(translational_rows(jacobian(model, q)));
  const VecX y = joint_inertia(model, q).transpose() * (Jp * u);
  return y.squaredNorm();
}

VecX dim_gradient(const ArmModel& model, const VecX& q, const Vec6& u,
                  double step) {
  check_q(model, q, "dim_gradient: q");
  if (!(step > 0.0)) throw InvalidArgument("dim_gradient: step must be > 0");
  VecX g(q.size());
  VecX qp = q, qm = q;
  for (int i = 0; i < q.size(); ++i) {
    qp[i] = q[i] + step;
    qm[i] = q[i] - step;
    g[i] = (dim_index(model, qp, u) - dim_index(model, qm, u)) / (2.0 * step);
    qp[i] = q[i];
    qm[i] = q[i];
  }
  return g;
}

Vec3 orientation_error(const Quat& desired, const Quat& actual) {
  Quat d = desired.normalized() * actual.normalized().conjugate();
  if (d.w() < 0.0) d.coeffs() = -d.coeffs();
  const double vn = d.vec().norm();
  if (vn < 1e-12) return 2.0 * d.vec();
  const double angle = 2.0 * std::atan2(vn, d.w());
  return d.vec() / vn * angle;
}

Vec6 pose_error(const Vec3& p_des, const Quat& o_des, const Vec3& p_act,
                const Quat& o_act) {
  Vec6 e;
  e.head<3>() = p_des - p_act;
  e.tail<3>() = orientation_error(o_des, o_act);
  return e;
}

IkResult inverse_kinematics(const ArmModel& model, const Vec3& position,
                            const Quat& orientation, const VecX& q_seed,
                            int max_iterations) {
  check_q(model, q_seed, "inverse_kinematics: q_seed");
  IkResult r;
  r.q = q_seed;
  const double lambda = 1e-2;
  for (int it = 0; it < max_iterations; ++it) {
    const CartesianState s = forward_kinematics(model, r.q);
    const Vec6 e = pose_error(position, orientation, s.position, s.orientation);
    r.position_error = e.head<3>().norm();
    r.orientation_error = e.tail<3>().norm();
    if (r.position_error < 1e-9 && r.orientation_error < 1e-9) {
      r.converged = true;
      return r;
    }
    const MatX J = jacobian(model, r.q);
    const MatX JJt = J * J.transpose() + lambda * lambda * MatX::Identity(6, 6);
    VecX dq = J.transpose() * JJt.ldlt().solve(e);
    const double n = dq.norm();
    if (n > 0.2) dq *= 0.2 / n;
    r.q = (r.q + dq).cwiseMax(model.q_min).cwiseMin(model.q_max);
  }
  r.converged = r.position_error < 1e-6 && r.orientation_error < 1e-6;
  return r;
}

}  // namespace catchsim
