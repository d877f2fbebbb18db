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
#include <cstdio>
#include <filesystem>
#include <random>

#include "catchsim/stiffness.hpp"

namespace catchsim {
namespace {

Mat3 random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> logs(-2.0, 3.0);
  Mat3 a;
  for (int i = 0; i < 9; ++i) a(i) = u(rng);
  const Mat3 q = Eigen::HouseholderQR<Mat3>(a).householderQ();
  Vec3 ev;
  for (int i = 0; i < 3; ++i) ev(i) = std::pow(10.0, logs(rng));
  return q * ev.asDiagonal() * q.transpose();
}

ArmTriangle bent_arm(double p) {
  ArmTriangle t;
  t.shoulder = Vec3(0.1, -0.2, 1.4);
  t.elbow = t.shoulder + Vec3(0.2, 0.05, -0.2);
  t.hand = t.shoulder + Vec3(0.5, 0.1, -0.1);
  t.activation = p;
  return t;
}

TEST(StiffnessModel, ZeroActivationUsesBaseCoContraction) {
  const StiffnessEllipsoid e = estimate_stiffness(bent_arm(0.0));
  EXPECT_DOUBLE_EQ(e.a_cc, 140.606);
  EXPECT_DOUBLE_EQ(e.params.c1, 2033.325);
  EXPECT_DOUBLE_EQ(e.params.alpha1, 0.255);
  EXPECT_DOUBLE_EQ(e.params.alpha2, 2.815);
}

TEST(StiffnessModel, PlanarArmClosedForm) {
  // Arm in the x-z plane: major axis x, median axis z, minor axis -y.
  ArmTriangle t;
  t.hand = Vec3(0.5, 0.0, 0.0);
  t.elbow = Vec3(0.25, 0.0, -0.2);
  t.activation = 0.3;
  const StiffnessEllipsoid e = estimate_stiffness(t);
  const double acc = 2033.325 * 0.3 + 140.606;
  const double r2 = 0.255 / 0.5, r3 = 2.815 * 0.2;
  const double norm = std::cbrt(r2 * r3);
  EXPECT_NEAR(e.d1, 0.5, 1e-15);
  EXPECT_NEAR(e.d2, 0.2, 1e-15);
  EXPECT_NEAR(e.K(0, 0), acc / norm, 1e-9);
  EXPECT_NEAR(e.K(2, 2), acc * r2 / norm, 1e-9);
  EXPECT_NEAR(e.K(1, 1), acc * r3 / norm, 1e-9);
  EXPECT_NEAR(e.K(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(e.K(0, 2), 0.0, 1e-9);
  EXPECT_NEAR(e.K(1, 2), 0.0, 1e-9);
}

TEST(StiffnessModel, FrameAndSpectrum) {
  for (double p : {0.0, 0.2, 0.7, 1.0}) {
    const ArmTriangle t = bent_arm(p);
    const StiffnessEllipsoid e = estimate_stiffness(t);
    EXPECT_LE((e.V.transpose() * e.V - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((e.K - e.K.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> es(e.K);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    // Shape matrix has unit determinant, so det K = A_cc^3.
    EXPECT_NEAR(e.K.determinant() / std::pow(e.a_cc, 3), 1.0, 1e-9);
    const Vec3 major = es.eigenvectors().col(2);
    const Vec3 l = (t.hand - t.shoulder).normalized();
    EXPECT_NEAR(std::abs(major.dot(l)), 1.0, 1e-9);
    // Ratios of the median and minor axes to the major one.
    EXPECT_NEAR(e.D(1, 1) / e.D(0, 0), 0.255 / e.d1, 1e-12);
    EXPECT_NEAR(e.D(2, 2) / e.D(0, 0), 2.815 * e.d2, 1e-12);
  }
}

TEST(StiffnessModel, ElbowDistanceToMajorAxis) {
  const ArmTriangle t = bent_arm(0.1);
  const StiffnessEllipsoid e = estimate_stiffness(t);
  const Vec3 l = t.hand - t.shoulder;
  const Vec3 r = t.elbow - t.shoulder;
  EXPECT_NEAR(e.d2, r.cross(l).norm() / l.norm(), 1e-12);
}

TEST(StiffnessModel, RejectsCollinearTriangleAndBadActivation) {
  ArmTriangle t;
  t.hand = Vec3(0.6, 0.0, 0.0);
  t.elbow = Vec3(0.3, 0.0, 0.0);
  EXPECT_THROW(estimate_stiffness(t), InvalidArgument);
  t.elbow = Vec3(0.3, 0.0, 1e-9);
  EXPECT_THROW(estimate_stiffness(t), InvalidArgument);
  EXPECT_THROW(estimate_stiffness(bent_arm(1.5)), InvalidArgument);
}

TEST(Cholesky, IdentityAndDiagonal) {
  const Vec6 id = chol_encode(Mat3::Identity());
  Vec6 want;
  want << 1, 0, 0, 1, 0, 1;
  EXPECT_EQ(id, want);
  const Vec6 d = chol_encode(Vec3(100.0, 400.0, 900.0).asDiagonal().toDenseMatrix());
  want << 10, 0, 0, 20, 0, 30;
  EXPECT_LE((d - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cholesky, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Mat3 K = random_spd(rng);
    const Vec6 l = chol_encode(K);
    const Mat3 u = chol_upper(l);
    EXPECT_GT(u.diagonal().minCoeff(), 0.0);
    worst = std::max(worst, (chol_decode(l) - K).norm() / K.norm());
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Cholesky, RejectsInvalidInput) {
  Mat3 k = Mat3::Identity();
  k(2, 2) = -1.0;
  EXPECT_THROW(chol_encode(k), InvalidArgument);
  k = Mat3::Identity();
  k(0, 1) = 0.5;
  EXPECT_THROW(chol_encode(k), InvalidArgument);
  Vec6 l;
  l << 1, 0, 0, 0, 0, 1;
  EXPECT_THROW(chol_decode(l), InvalidArgument);
}

MatX gaussian_samples(int n, const VecX& mu, const MatX& cov, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const MatX l = cov.llt().matrixL();
  MatX x(n, mu.size());
  for (int i = 0; i < n; ++i) {
    VecX z(mu.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = nd(rng);
    x.row(i) = (mu + l * z).transpose();
  }
  return x;
}

TEST(Gmm, SingleGaussianRecoveredWithinStandardErrors) {
  VecX mu(3);
  mu << 0.5, -2.0, 10.0;
  MatX cov(3, 3);
  cov << 0.04, 0.03, -0.02,
         0.03, 1.0, 0.2,
         -0.02, 0.2, 4.0;
  const int n = 5000;
  const MatX x = gaussian_samples(n, mu, cov, 11);
  GmmOptions o;
  o.components = 1;
  const GmmFit fit = train_gmm(x, 1, o);
  ASSERT_EQ(fit.model.components(), 1);
  EXPECT_TRUE(fit.converged);
  EXPECT_DOUBLE_EQ(fit.model.weights(0), 1.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LE(std::abs(fit.model.means[0](i) - mu(i)), 3.0 * std::sqrt(cov(i, i) / n));
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n);
      EXPECT_LE(std::abs(fit.model.covs[0](i, j) - cov(i, j)), 3.0 * se) << i << "," << j;
    }
  }
}

TEST(Gmm, SingleComponentRegressionIsLeastSquaresLine) {
  VecX mu(3);
  mu << -0.1, 3.0, 1.0;
  MatX cov(3, 3);
  cov << 0.01, 0.05, -0.02,
         0.05, 0.5, 0.0,
         -0.02, 0.0, 0.3;
  const MatX x = gaussian_samples(800, mu, cov, 5);
  GmmOptions o;
  o.components = 1;
  const Gmm g = train_gmm(x, 1, o).model;
  // Ordinary least squares of each output on [1, input].
  MatX a(x.rows(), 2);
  a.col(0).setOnes();
  a.col(1) = x.col(0);
  const MatX beta = a.colPivHouseholderQr().solve(x.rightCols(2));
  for (double q : {-0.4, -0.1, 0.0, 0.3}) {
    VecX in(1);
    in << q;
    const GmrOutput out = gmr(g, in);
    for (int k = 0; k < 2; ++k) {
      const double want = beta(0, k) + beta(1, k) * q;
      EXPECT_NEAR(out.mean(k), want, 1e-5 * (1.0 + std::abs(want)));
    }
  }
}

TEST(Gmm, DeterministicForFixedSeed) {
  const std::vector<DemoSample> demos = synth_demonstrations(SynthDemoParams{}, 4, 9);
  const MatX x = demos_to_matrix(demos);
  const MatX copy = x;
  const GmmFit a = train_gmm(x, 1);
  const GmmFit b = train_gmm(copy, 1);
  ASSERT_EQ(a.model.components(), b.model.components());
  EXPECT_EQ(a.model.weights, b.model.weights);
  for (int k = 0; k < a.model.components(); ++k) {
    EXPECT_EQ(a.model.means[k], b.model.means[k]);
    EXPECT_EQ(a.model.covs[k], b.model.covs[k]);
  }
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
}

TEST(Gmm, DefaultsAndStructure) {
  EXPECT_EQ(GmmOptions{}.components, 8);
  const GmmFit fit = train_gmm(demos_to_matrix(synth_demonstrations(SynthDemoParams{}, 4, 2)), 1);
  EXPECT_EQ(fit.model.components(), 8);
  EXPECT_NEAR(fit.model.weights.sum(), 1.0, 1e-12);
  for (const MatX& c : fit.model.covs) {
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatX>(c).eigenvalues().minCoeff(), 0.0);
  }
  EXPECT_NO_THROW(fit.model.validate());
}

TEST(Gmm, TooFewSamplesRejected) {
  const MatX x = MatX::Random(79, 3);
  EXPECT_THROW(train_gmm(x, 1), InvalidArgument);
  GmmOptions o;
  o.components = 7;
  EXPECT_NO_THROW(train_gmm(MatX::Random(70, 3), 1, o));
}

TEST(Gmm, DegenerateComponentsArePruned) {
  // Only two distinct points: at most two components can hold mass.
  MatX x(100, 2);
  for (int i = 0; i < 100; ++i) {
    x(i, 0) = (i % 2 == 0) ? 0.0 : 1.0;
    x(i, 1) = (i % 2 == 0) ? 5.0 : -5.0;
  }
  const GmmFit fit = train_gmm(x, 1);
  EXPECT_LE(fit.model.components(), 2);
  EXPECT_FALSE(fit.warnings.empty());
  EXPECT_NEAR(fit.model.weights.sum(), 1.0, 1e-12);
}

class Profile : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    demos_ = new std::vector<DemoSample>(synth_demonstrations(SynthDemoParams{}, 4, 1));
    profile_ = new StiffnessProfile(train_profile(*demos_));
  }
  static void TearDownTestSuite() {
    delete demos_;
    delete profile_;
  }
  static std::vector<DemoSample>* demos_;
  static StiffnessProfile* profile_;
};
std::vector<DemoSample>* Profile::demos_ = nullptr;
StiffnessProfile* Profile::profile_ = nullptr;

TEST_F(Profile, ReconstructsNoiseFreeTrainingData) {
  double lo = 1e300, hi = -1e300, worst = 0.0;
  Vec6 clo = Vec6::Constant(1e300), chi = Vec6::Constant(-1e300), cworst = Vec6::Zero();
  for (const DemoSample& d : *demos_) {
    const Mat3 K = chol_decode(d.chol);
    lo = std::min(lo, K(2, 2));
    hi = std::max(hi, K(2, 2));
    clo = clo.cwiseMin(d.chol);
    chi = chi.cwiseMax(d.chol);
    const StiffnessQuery q = gmr_predict(*profile_, d.delta_d);
    EXPECT_FALSE(q.extrapolated);
    worst = std::max(worst, (q.K - K).cwiseAbs().maxCoeff());
    cworst = cworst.cwiseMax((q.chol - d.chol).cwiseAbs());
  }
  EXPECT_LE(worst, 0.02 * (hi - lo));
  EXPECT_LE(cworst.maxCoeff(), 0.02 * (chi - clo).maxCoeff());
}

TEST_F(Profile, EndpointBands) {
  EXPECT_LT(gmr_predict(*profile_, 0.0).K(2, 2), 150.0);
  EXPECT_GT(gmr_predict(*profile_, kHumanMovementLength).K(2, 2), 1000.0);
}

TEST_F(Profile, SpdAndContinuousOverTrainingRange) {
  for (int i = 0; i <= 200; ++i) {
    const double d = kHumanMovementLength * i / 200.0;
    const StiffnessQuery a = gmr_predict(*profile_, d);
    const StiffnessQuery b = gmr_predict(*profile_, d + 1e-6);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(a.K).eigenvalues().minCoeff(), 0.0);
    EXPECT_LE((a.chol - b.chol).cwiseAbs().maxCoeff(), 1e-3) << d;
  }
}

TEST_F(Profile, ExtrapolationIsFlagged) {
  EXPECT_TRUE(gmr_predict(*profile_, 0.05).extrapolated);
  EXPECT_TRUE(gmr_predict(*profile_, -0.4).extrapolated);
  EXPECT_FALSE(gmr_predict(*profile_, -0.1).extrapolated);
}

TEST_F(Profile, StiffnessScalingCarriesThrough) {
  const double s = 2.7;
  std::vector<DemoSample> scaled = *demos_;
  for (DemoSample& d : scaled) d.chol *= std::sqrt(s);
  const StiffnessProfile p2 = train_profile(scaled);
  for (int i = 0; i <= 20; ++i) {
    const double d = kHumanMovementLength * i / 20.0;
    const Mat3 a = gmr_predict(*profile_, d).K;
    const Mat3 b = gmr_predict(p2, d).K;
    EXPECT_LE((b - s * a).norm(), 1e-6 * (s * a).norm()) << d;
  }
}

TEST_F(Profile, JsonRoundTripIsExact) {
  const StiffnessProfile back = profile_from_json(profile_to_json(*profile_));
  EXPECT_EQ(back.d_h, profile_->d_h);
  for (double d : {0.0, -0.1, -0.27}) {
    EXPECT_EQ(gmr_predict(back, d).chol, gmr_predict(*profile_, d).chol);
  }
  EXPECT_THROW(profile_from_json("{\"format_version\": 1}"), ParseError);
  EXPECT_THROW(profile_from_json("not json"), ParseError);
}

TEST(SynthDemos, DeterministicAndSpd) {
  const auto a = synth_demonstrations(SynthDemoParams{}, 3, 42);
  const auto b = synth_demonstrations(SynthDemoParams{}, 3, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].delta_d, b[i].delta_d);
    EXPECT_EQ(a[i].chol, b[i].chol);
    const Mat3 K = chol_decode(a[i].chol);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(K).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(SynthDemos, MonotoneProfileWithEndpointBands) {
  const SynthDemoParams p;
  const auto demos = synth_demonstrations(p, 1, 1);
  double prev = 0.0;
  for (const DemoSample& d : demos) {
    const double kz = chol_decode(d.chol)(2, 2);
    EXPECT_GT(kz, prev);
    prev = kz;
  }
  EXPECT_NEAR(demos.front().delta_d, 0.0, 1e-15);
  EXPECT_NEAR(demos.back().delta_d, -0.27, 1e-15);
  EXPECT_LT(chol_decode(demos.front().chol)(2, 2), 150.0);
  const double end = chol_decode(demos.back().chol)(2, 2);
  EXPECT_GE(end, 1000.0);
  EXPECT_LE(end, 1300.0);
}

TEST(SynthDemos, NoiseIsSeeded) {
  SynthDemoParams p;
  p.activation_noise = 0.02;
  p.distance_noise = 0.002;
  const auto a = synth_demonstrations(p, 2, 5);
  const auto b = synth_demonstrations(p, 2, 5);
  const auto c = synth_demonstrations(p, 2, 6);
  EXPECT_EQ(a[10].chol, b[10].chol);
  EXPECT_NE(a[10].chol, c[10].chol);
}

TEST(SynthDemos, CsvRoundTrip) {
  const auto demos = synth_demonstrations(SynthDemoParams{}, 1, 1);
  const std::string path =
      (std::filesystem::temp_directory_path() / "catchsim_demos_test.csv").string();
  write_demos_csv(path, demos);
  const auto back = read_demos_csv(path);
  ASSERT_EQ(back.size(), demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    EXPECT_EQ(back[i].delta_d, demos[i].delta_d);
    EXPECT_EQ(back[i].chol, demos[i].chol);
  }
  std::remove(path.c_str());
}

TEST(BundledProfile, MeetsEndpointBands) {
  const StiffnessProfile p = load_profile(default_profile_path());
  EXPECT_EQ(p.gmm.components(), 8);
  EXPECT_DOUBLE_EQ(p.d_h, -0.27);
  EXPECT_LT(gmr_predict(p, 0.0).K(2, 2), 150.0);
  EXPECT_GT(gmr_predict(p, p.d_h).K(2, 2), 1000.0);
}

}  // namespace
}  // namespace catchsim
