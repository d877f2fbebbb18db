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

#include "catchsim/gmm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace catchsim {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Log-density of N(x | mu, L L^T) given the Cholesky factor.
double log_normal(const VecX& x, const VecX& mu, const Eigen::LLT<MatX>& llt) {
  const VecX z = llt.matrixL().solve(x - mu);
  const auto& l = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) log_det += std::log(l(i, i));
  return -0.5 * z.squaredNorm() - log_det - 0.5 * static_cast<double>(x.size()) * kLog2Pi;
}

double log_sum_exp(const VecX& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::LLT<MatX> factor(const MatX& cov, const char* what) {
  Eigen::LLT<MatX> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": covariance not positive definite");
  }
  return llt;
}

// k-means++ seeding followed by Lloyd iterations; returns labels.
std::vector<int> kmeans(const MatX& x, int k, int iterations, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> centers_idx;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers_idx.push_back(pick(rng));
  VecX d2 = (x.rowwise() - x.row(centers_idx[0])).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centers_idx.size()) < k) {
    const double total = d2.sum();
    Eigen::Index next = 0;
    if (total <= 0.0) {
      next = pick(rng);
    } else {
      double r = unit(rng) * total;
      for (next = 0; next < n - 1; ++next) {
        r -= d2(next);
        if (r < 0.0) break;
      }
    }
    centers_idx.push_back(next);
    d2 = d2.cwiseMin((x.rowwise() - x.row(next)).rowwise().squaredNorm());
  }
  MatX centers(k, x.cols());
  for (int j = 0; j < k; ++j) centers.row(j) = x.row(centers_idx[j]);

  std::vector<int> labels(n, -1);
  for (int it = 0; it < std::max(1, iterations); ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[i] != best) {
        labels[i] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    MatX sum = MatX::Zero(k, x.cols());
    VecX count = VecX::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(labels[i]) += x.row(i);
      count(labels[i]) += 1.0;
    }
    for (int j = 0; j < k; ++j) {
      if (count(j) > 0.0) centers.row(j) = sum.row(j) / count(j);
    }
  }
  return labels;
}

}  // namespace

void Gmm::validate() const {
  const int k = components();
  if (k < 1) throw InvalidArgument("Gmm: no components");
  if (static_cast<int>(means.size()) != k || static_cast<int>(covs.size()) != k) {
    throw DimensionError("Gmm: component arrays differ in length");
  }
  const int d = dim();
  if (inputs < 1 || inputs >= d) throw InvalidArgument("Gmm: inputs must be in [1, dim)");
  require_size(input_min.size(), inputs, "Gmm.input_min");
  require_size(input_max.size(), inputs, "Gmm.input_max");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw InvalidArgument("Gmm: weights must be non-negative and sum to 1");
  }
  for (int j = 0; j < k; ++j) {
    require_size(means[j].size(), d, "Gmm.means");
    require_size(covs[j].rows(), d, "Gmm.covs rows");
    require_size(covs[j].cols(), d, "Gmm.covs cols");
    if ((covs[j] - covs[j].transpose()).cwiseAbs().maxCoeff() >
        1e-9 * (1.0 + covs[j].cwiseAbs().maxCoeff())) {
      throw InvalidArgument("Gmm: covariance not symmetric");
    }
    factor(covs[j], "Gmm");
  }
}

GmmFit train_gmm(const MatX& samples, int inputs, const GmmOptions& options) {
  const int k = options.components;
  if (k < 1) throw InvalidArgument("train_gmm: components must be >= 1");
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (inputs < 1 || inputs >= d) throw InvalidArgument("train_gmm: inputs must be in [1, dim)");
  if (n < 10 * static_cast<Eigen::Index>(k)) {
    throw InvalidArgument("train_gmm: need at least " + std::to_string(10 * k) +
                          " samples, got " + std::to_string(n));
  }
  if (!samples.allFinite()) throw InvalidArgument("train_gmm: non-finite sample");

  // EM runs on standardized coordinates; the model is mapped back at the end.
  const VecX center = samples.colwise().mean().transpose();
  VecX scale = ((samples.rowwise() - center.transpose()).colwise().squaredNorm() /
                static_cast<double>(n))
                   .cwiseSqrt()
                   .transpose();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (!(scale(c) > 1e-12 * (1.0 + std::abs(center(c))))) scale(c) = 1.0;
  }
  const MatX x = (samples.rowwise() - center.transpose()).array().rowwise() /
                 scale.transpose().array();
  const MatX reg = options.regularization * MatX::Identity(d, d);

  std::mt19937_64 rng(options.seed);
  const std::vector<int> labels = kmeans(x, k, options.kmeans_iterations, rng);

  std::vector<VecX> mu(k, VecX::Zero(d));
  std::vector<MatX> sigma(k, MatX::Zero(d, d));
  VecX pi = VecX::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    mu[labels[i]] += x.row(i).transpose();
    pi(labels[i]) += 1.0;
  }
  for (int j = 0; j < k; ++j) {
    if (pi(j) > 0.0) mu[j] /= pi(j);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const VecX e = x.row(i).transpose() - mu[labels[i]];
    sigma[labels[i]] += e * e.transpose();
  }
  for (int j = 0; j < k; ++j) {
    sigma[j] = (pi(j) > 0.0 ? MatX(sigma[j] / pi(j)) : MatX::Identity(d, d)) + reg;
  }
  pi /= static_cast<double>(n);

  GmmFit fit;
  MatX log_r(n, k);
  double prev = -std::numeric_limits<double>::infinity();
  double ll = prev;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    // E-step.
    const int kk = static_cast<int>(pi.size());
    log_r.resize(n, kk);
    for (int j = 0; j < kk; ++j) {
      const Eigen::LLT<MatX> llt = factor(sigma[j], "train_gmm");
      const double lp = pi(j) > 0.0 ? std::log(pi(j)) : -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        log_r(i, j) = lp + log_normal(x.row(i).transpose(), mu[j], llt);
      }
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lse = log_sum_exp(log_r.row(i).transpose());
      total += lse;
      log_r.row(i).array() -= lse;
    }
    ll = total / static_cast<double>(n);
    if (std::abs(ll - prev) < options.tolerance) {
      fit.converged = true;
      break;
    }
    prev = ll;

    // M-step.
    const MatX r = log_r.array().exp().matrix();
    const VecX nk = r.colwise().sum().transpose();
    std::vector<int> keep;
    for (int j = 0; j < kk; ++j) {
      if (nk(j) / static_cast<double>(n) >= options.prune_weight) {
        keep.push_back(j);
      } else {
        fit.warnings.push_back("train_gmm: pruned component with weight " +
                               std::to_string(nk(j) / static_cast<double>(n)) +
                               " at iteration " + std::to_string(it));
      }
    }
    if (keep.empty()) throw NumericalError("train_gmm: every component degenerated");
    std::vector<VecX> mu_next;
    std::vector<MatX> sigma_next;
    VecX pi_next(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t a = 0; a < keep.size(); ++a) {
      const int j = keep[a];
      const VecX m = (x.transpose() * r.col(j)) / nk(j);
      const MatX c = x.rowwise() - m.transpose();
      const MatX w = c.array().colwise() * r.col(j).array();
      MatX s = c.transpose() * w / nk(j);
      s = 0.5 * (s + s.transpose()) + reg;
      mu_next.push_back(m);
      sigma_next.push_back(s);
      pi_next(static_cast<Eigen::Index>(a)) = nk(j);
    }
    pi = pi_next / pi_next.sum();
    mu = std::move(mu_next);
    sigma = std::move(sigma_next);
  }
  fit.iterations = it;
  if (!fit.converged) {
    fit.warnings.push_back("train_gmm: no convergence after " +
                           std::to_string(options.max_iterations) + " iterations");
  }

  // Map back to original units, components ordered by their first input mean.
  const int kk = static_cast<int>(pi.size());
  std::vector<int> order(kk);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return mu[a](0) < mu[b](0); });
  Gmm& g = fit.model;
  g.inputs = inputs;
  g.weights.resize(kk);
  const MatX s_diag = scale.asDiagonal();
  for (int a = 0; a < kk; ++a) {
    const int j = order[a];
    g.weights(a) = pi(j);
    g.means.push_back(center + scale.cwiseProduct(mu[j]));
    MatX c = s_diag * sigma[j] * s_diag;
    g.covs.push_back(0.5 * (c + c.transpose()));
  }
  g.input_min = samples.leftCols(inputs).colwise().minCoeff().transpose();
  g.input_max = samples.leftCols(inputs).colwise().maxCoeff().transpose();
  fit.log_likelihood = gmm_log_likelihood(g, samples);
  return fit;
}

double gmm_log_likelihood(const Gmm& model, const MatX& samples) {
  const int k = model.components();
  require_size(samples.cols(), model.dim(), "gmm_log_likelihood samples");
  std::vector<Eigen::LLT<MatX>> llt;
  for (int j = 0; j < k; ++j) llt.push_back(factor(model.covs[j], "gmm_log_likelihood"));
  double total = 0.0;
  VecX lp(k);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const VecX x = samples.row(i).transpose();
    for (int j = 0; j < k; ++j) {
      lp(j) = std::log(model.weights(j)) + log_normal(x, model.means[j], llt[j]);
    }
    total += log_sum_exp(lp);
  }
  return samples.rows() > 0 ? total / static_cast<double>(samples.rows()) : 0.0;
}

GmrOutput gmr(const Gmm& model, const VecX& input) {
  const int k = model.components();
  const int ni = model.inputs;
  const int no = model.dim() - ni;
  require_size(input.size(), ni, "gmr input");

  GmrOutput out;
  VecX log_h(k);
  std::vector<VecX> cond_mean(k);
  std::vector<MatX> cond_cov(k);
  for (int j = 0; j < k; ++j) {
    const MatX& s = model.covs[j];
    const VecX& m = model.means[j];
    const Eigen::LLT<MatX> ii = factor(s.topLeftCorner(ni, ni), "gmr");
    log_h(j) = std::log(model.weights(j)) + log_normal(input, m.head(ni), ii);
    const MatX gain = ii.solve(s.topRightCorner(ni, no)).transpose();  // S_OI S_II^-1
    cond_mean[j] = m.tail(no) + gain * (input - m.head(ni));
    cond_cov[j] = s.bottomRightCorner(no, no) - gain * s.topRightCorner(ni, no);
  }
  out.responsibilities = (log_h.array() - log_sum_exp(log_h)).exp().matrix();
  out.mean = VecX::Zero(no);
  for (int j = 0; j < k; ++j) out.mean += out.responsibilities(j) * cond_mean[j];
  out.cov = MatX::Zero(no, no);
  for (int j = 0; j < k; ++j) {
    const VecX e = cond_mean[j] - out.mean;
    out.cov += out.responsibilities(j) * (cond_cov[j] + e * e.transpose());
  }
  out.extrapolated = (input.array() < model.input_min.array()).any() ||
                     (input.array() > model.input_max.array()).any();
  return out;
}

json gmm_to_json(const Gmm& model) {
  json j;
  j["inputs"] = model.inputs;
  j["weights"] = vec_to_json(model.weights);
  j["means"] = json::array();
  j["covariances"] = json::array();
  for (int c = 0; c < model.components(); ++c) {
    j["means"].push_back(vec_to_json(model.means[c]));
    j["covariances"].push_back(mat_to_json(model.covs[c]));
  }
  j["input_min"] = vec_to_json(model.input_min);
  j["input_max"] = vec_to_json(model.input_max);
  return j;
}

Gmm gmm_from_json(const json& j, const std::string& where) {
  Gmm g;
  g.inputs = json_required<int>(j, "inputs", where);
  g.weights = json_vecx(json_required_node(j, "weights", where), where + ".weights");
  const json& means = json_required_node(j, "means", where);
  const json& covs = json_required_node(j, "covariances", where);
  if (!means.is_array() || !covs.is_array()) {
    throw ParseError(where + ": means and covariances must be arrays");
  }
  for (std::size_t c = 0; c < means.size(); ++c) {
    g.means.push_back(json_vecx(means[c], where + ".means[" + std::to_string(c) + "]"));
  }
  for (std::size_t c = 0; c < covs.size(); ++c) {
    g.covs.push_back(json_matx(covs[c], where + ".covariances[" + std::to_string(c) + "]"));
  }
  g.input_min = json_vecx(json_required_node(j, "input_min", where), where + ".input_min");
  g.input_max = json_vecx(json_required_node(j, "input_max", where), where + ".input_max");
  try {
    g.validate();
  } catch (const Error& e) {
    throw ParseError(where + ": " + e.what());
  }
  return g;
}

}  // namespace catchsim
