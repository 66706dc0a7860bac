// Copyright 2026 The elalign Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "elalign/jointgmm.h"

#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "test-util.h"

namespace elalign {
namespace {

using testing::TempDir;
using testing::read_bytes;
using testing::write_text;

Eigen::MatrixXd gaussian_data(std::mt19937_64 *gen, Index n, Index d) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(d, d);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = nd(*gen);
  Eigen::MatrixXd z(n, d);
  for (Index i = 0; i < z.size(); ++i) z.data()[i] = nd(*gen);
  Eigen::RowVectorXd shift(d);
  for (Index i = 0; i < d; ++i) shift(i) = 3.0 * nd(*gen);
  return (z * a).rowwise() + shift;
}

Eigen::MatrixXd clustered_data(std::mt19937_64 *gen, Index n, Index d, int clusters) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> pick(0, clusters - 1);
  Eigen::MatrixXd centers(clusters, d);
  for (Index i = 0; i < centers.size(); ++i) centers.data()[i] = 4.0 * nd(*gen);
  Eigen::MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i) {
    const int c = pick(*gen);
    for (Index j = 0; j < d; ++j) x(i, j) = centers(c, j) + (0.5 + 0.3 * c) * nd(*gen);
  }
  return x;
}

JointGmmd single(const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov, Index dx) {
  JointGmmd g;
  g.dx = dx;
  g.dy = mean.size() - dx;
  g.weights = Eigen::VectorXd::Ones(1);
  g.means = mean.transpose();
  g.covariances = {cov};
  return g;
}

TEST(LogLikelihood, StandardNormalAtOrigin) {
  JointGmmd g = single(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_NEAR(log_likelihood(g, x), -std::log(2.0 * M_PI), 1e-12);
  EXPECT_NEAR(log_likelihood(g, x), -1.837877, 1e-6);
}

TEST(LogLikelihood, AdditiveAndEmpty) {
  std::mt19937_64 gen(1);
  Eigen::MatrixXd x = clustered_data(&gen, 200, 3, 2);
  EmOptions o;
  o.mixtures = 2;
  JointGmmd g = fit_em<double>(x, 1, o).model;
  Eigen::MatrixXd twice(400, 3);
  twice << x, x;
  EXPECT_NEAR(log_likelihood(g, twice), 2.0 * log_likelihood(g, x),
              1e-9 * std::abs(log_likelihood(g, x)));
  EXPECT_EQ(log_likelihood(g, Eigen::MatrixXd(0, 3)), 0.0);
  EXPECT_ERROR_CODE(log_likelihood(g, Eigen::MatrixXd::Zero(2, 4)),
                    ErrorCode::kDimensionMismatch);
}

TEST(FitEm, SingleComponentIsClosedForm) {
  std::mt19937_64 gen(2);
  Eigen::MatrixXd x = gaussian_data(&gen, 300, 4);
  EmOptions o;
  o.mixtures = 1;
  EmFit<double> fit = fit_em<double>(x, 2, o);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  const Eigen::MatrixXd cov = c.transpose() * c / 300.0;
  EXPECT_EQ(fit.model.weights(0), 1.0);
  EXPECT_LT((fit.model.means.row(0) - mean).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((fit.model.covariances[0] - cov).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GE(fit.iterations, 1);
}

TEST(FitEm, FloorPreventsCollapse) {
  Eigen::MatrixXd x(3, 2);
  x << 0, 0, 1, 2, 5, -1;
  EmOptions o;
  o.mixtures = 3;
  EmFit<double> fit = fit_em<double>(x, 1, o);
  for (const auto &c : fit.model.covariances) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    EXPECT_GE(es.eigenvalues().minCoeff(), o.covariance_floor * (1 - 1e-9));
  }
  EXPECT_TRUE(std::isfinite(fit.log_likelihood.back()));
  EXPECT_NO_THROW(validate_gmm(fit.model));
}

TEST(FitEm, Deterministic) {
  std::mt19937_64 gen(3);
  Eigen::MatrixXd x = clustered_data(&gen, 400, 4, 3);
  EmOptions o;
  o.mixtures = 4;
  o.seed = 12;
  EmFit<double> a = fit_em<double>(x, 2, o);
  EmFit<double> b = fit_em<double>(x, 2, o);
  EXPECT_TRUE(a.model == b.model);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  o.seed = 13;
  EmFit<double> c = fit_em<double>(x, 2, o);
  EXPECT_EQ(c.model.dim(), 4);
}

TEST(FitEm, LogLikelihoodNondecreasing) {
  for (int t = 0; t < 10; ++t) {
    std::mt19937_64 gen(100 + t);
    Eigen::MatrixXd x = clustered_data(&gen, 300, 4, 3);
    EmOptions o;
    o.mixtures = 1 + t % 4;
    o.seed = t;
    o.tol = 0.0;
    o.max_iters = 30;
    EmFit<double> fit = fit_em<double>(x, 2, o);
    for (size_t i = 1; i < fit.log_likelihood.size(); ++i)
      EXPECT_GE(fit.log_likelihood[i] - fit.log_likelihood[i - 1], -1e-8);
    EXPECT_NEAR(fit.log_likelihood.back(), log_likelihood(fit.model, x),
                1e-9 * std::abs(fit.log_likelihood.back()));
  }
}

TEST(FitEm, Errors) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
  EmOptions o;
  o.mixtures = 4;
  EXPECT_ERROR_CODE(fit_em<double>(x, 2, o), ErrorCode::kTooFewSamples);
  o.mixtures = 1;
  EXPECT_ERROR_CODE(fit_em<double>(x, 0, o), ErrorCode::kDimensionMismatch);
  EXPECT_ERROR_CODE(fit_em<double>(x, 4, o), ErrorCode::kDimensionMismatch);
}

TEST(FitEm, FloatScalar) {
  std::mt19937_64 gen(4);
  Eigen::MatrixXf x = clustered_data(&gen, 300, 4, 2).cast<float>();
  EmOptions o;
  o.mixtures = 2;
  EmFit<float> fit = fit_em<float>(x, 2, o);
  EXPECT_NEAR(fit.model.weights.sum(), 1.0f, 1e-5f);
}

TEST(Posteriors, RowsSumToOne) {
  std::mt19937_64 gen(5);
  Eigen::MatrixXd x = clustered_data(&gen, 500, 4, 4);
  EmOptions o;
  o.mixtures = 4;
  JointGmmd g = fit_em<double>(x, 2, o).model;
  Eigen::MatrixXd p = posteriors(g, x);
  EXPECT_LT((p.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_GE(p.minCoeff(), 0.0);
}

TEST(ConvertFrame, ConditionalMeanExamples) {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.5, 0.5, 1.0;
  JointGmmd g = single(Eigen::Vector2d::Zero(), cov, 1);
  Eigen::VectorXd x(1);
  x << 2.0;
  EXPECT_NEAR(convert_frame(g, x)(0), 1.0, 1e-12);

  Eigen::Vector4d mean(1.0, -2.0, 3.0, 4.0);
  Eigen::Matrix4d block = Eigen::Matrix4d::Identity();
  block(0, 1) = block(1, 0) = 0.3;
  block(2, 3) = block(3, 2) = -0.2;
  JointGmmd ind = single(mean, block, 2);
  for (double v : {-5.0, 0.0, 7.0}) {
    Eigen::VectorXd y = convert_frame(ind, Eigen::Vector2d(v, 2 * v).eval());
    EXPECT_NEAR(y(0), 3.0, 1e-12);
    EXPECT_NEAR(y(1), 4.0, 1e-12);
  }
  Eigen::Matrix4d full = block;
  full(0, 2) = full(2, 0) = 0.4;
  JointGmmd dep = single(mean, full, 2);
  Eigen::VectorXd at_mean = convert_frame(dep, Eigen::Vector2d(1.0, -2.0).eval());
  EXPECT_NEAR(at_mean(0), 3.0, 1e-12);
  EXPECT_NEAR(at_mean(1), 4.0, 1e-12);
  EXPECT_ERROR_CODE(convert_frame(dep, Eigen::Vector3d::Zero().eval()),
                    ErrorCode::kDimensionMismatch);
}

TEST(ConvertFrame, SingleMixtureEqualsLeastSquares) {
  std::mt19937_64 gen(6);
  Eigen::MatrixXd data = gaussian_data(&gen, 2000, 5);
  EmOptions o;
  o.mixtures = 1;
  JointGmmd g = fit_em<double>(data, 3, o).model;
  Eigen::MatrixXd design(2000, 4);
  design << Eigen::VectorXd::Ones(2000), data.leftCols(3);
  Eigen::MatrixXd beta = design.colPivHouseholderQr().solve(data.rightCols(2));
  GmmConverter<double> conv(g);
  Eigen::MatrixXd pred = conv.convert_rows(data.leftCols(3));
  Eigen::MatrixXd ols = design * beta;
  EXPECT_LT((pred - ols).cwiseAbs().maxCoeff() / ols.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ConvertFrame, MixtureOutputIsConvexCombination) {
  std::mt19937_64 gen(7);
  Eigen::MatrixXd x = clustered_data(&gen, 600, 4, 3);
  EmOptions o;
  o.mixtures = 3;
  JointGmmd g = fit_em<double>(x, 2, o).model;
  GmmConverter<double> conv(g);
  Eigen::MatrixXd y = conv.convert_rows(x.leftCols(2));
  EXPECT_EQ(y.rows(), 600);
  EXPECT_EQ(y.cols(), 2);
  EXPECT_TRUE(y.allFinite());
  for (Index i = 0; i < 20; ++i)
    EXPECT_LT((conv.convert(x.row(i).head(2).transpose()) - y.row(i).transpose()).norm(), 1e-12);
}

TEST(GmmIo, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 gen(8);
  Eigen::MatrixXd x = clustered_data(&gen, 300, 4, 2);
  EmOptions o;
  o.mixtures = 2;
  JointGmmd g = fit_em<double>(x, 2, o).model;
  write_gmm(dir / "m.lgmm", g);
  const std::string bytes = read_bytes(dir / "m.lgmm");
  EXPECT_EQ(bytes.size(), 16u + 8 * (2 + 2 * 4 + 2 * 16));
  EXPECT_EQ(bytes.substr(0, 4), "LGM1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 2);
  JointGmmd back = read_gmm(dir / "m.lgmm");
  EXPECT_TRUE(back == g);
  write_gmm(dir / "n.lgmm", back);
  EXPECT_EQ(read_bytes(dir / "n.lgmm"), bytes);
}

TEST(GmmIo, Errors) {
  TempDir dir;
  JointGmmd g = single(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 1);
  write_gmm(dir / "m.lgmm", g);
  std::string bytes = read_bytes(dir / "m.lgmm");
  write_text(dir / "t.lgmm", bytes.substr(0, bytes.size() - 3));
  EXPECT_ERROR_CODE(read_gmm(dir / "t.lgmm"), ErrorCode::kTruncatedFile);
  std::string magic = bytes;
  magic[3] = '2';
  write_text(dir / "b.lgmm", magic);
  EXPECT_ERROR_CODE(read_gmm(dir / "b.lgmm"), ErrorCode::kBadMagic);
  write_text(dir / "x.lgmm", bytes + "z");
  EXPECT_ERROR_CODE(read_gmm(dir / "x.lgmm"), ErrorCode::kParseError);

  JointGmmd bad = g;
  bad.covariances[0](0, 0) = -1.0;
  EXPECT_ERROR_CODE(validate_gmm(bad), ErrorCode::kDegenerateCovariance);
  EXPECT_ERROR_CODE(write_gmm(dir / "bad.lgmm", bad), ErrorCode::kDegenerateCovariance);
  JointGmmd weights = g;
  weights.weights(0) = 0.9;
  EXPECT_ERROR_CODE(validate_gmm(weights), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace elalign
