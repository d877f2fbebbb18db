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

// Gaussian mixture models (EM with k-means++ seeding) and Gaussian mixture
// regression. The leading `inputs` coordinates of each sample are the
// regression inputs, the rest the outputs.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catchsim/common.hpp"
#include "catchsim/json_util.hpp"

namespace catchsim {

struct Gmm {
  int inputs = 1;
  VecX weights;               // sums to 1
  std::vector<VecX> means;    // d each
  std::vector<MatX> covs;     // d x d, SPD
  VecX input_min, input_max;  // training range of the inputs

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  void validate() const;
};

inline constexpr int kDefaultGmmComponents = 8;

struct GmmOptions {
  int components = kDefaultGmmComponents;
  std::uint64_t seed = 1;
  int max_iterations = 500;
  double tolerance = 1e-8;       // change of the mean log-likelihood
  double regularization = 1e-6;  // added to standardized covariances
  double prune_weight = 1e-6;
  int kmeans_iterations = 50;
};

struct GmmFit {
  Gmm model;
  double log_likelihood = 0.0;  // mean per sample, original units
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// samples: one row per sample. Needs at least 10 * components rows.
GmmFit train_gmm(const MatX& samples, int inputs, const GmmOptions& options = {});

// Mean log-density per sample.
double gmm_log_likelihood(const Gmm& model, const MatX& samples);

struct GmrOutput {
  VecX mean;
  MatX cov;
  VecX responsibilities;
  bool extrapolated = false;
};

GmrOutput gmr(const Gmm& model, const VecX& input);

json gmm_to_json(const Gmm& model);
Gmm gmm_from_json(const json& j, const std::string& where);

}  // namespace catchsim
