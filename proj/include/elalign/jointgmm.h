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

// Joint-density Gaussian mixture over concatenated [source | target] frames.
//
// Training is EM with full covariances, initialized from seeded k-means++.
// Conversion is the frame-wise conditional expectation
//
//   E[y | x] = sum_m P(m | x) (mu_y^m + S_yx^m (S_xx^m)^-1 (x - mu_x^m)),
//
// with P(m | x) taken from the source marginal of each component.
//
// Covariances are floored by clamping eigenvalues below the floor; a
// covariance whose spectrum already clears the floor is left untouched.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "elalign/error.h"
#include "elalign/seqio.h"

namespace elalign {

template <typename Scalar>
struct JointGmm {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Index dx = 0;
  Index dy = 0;
  Vector weights;                   // M
  Matrix means;                     // M x (dx + dy)
  std::vector<Matrix> covariances;  // M of (dx + dy) x (dx + dy)

  Index num_mixtures() const { return weights.size(); }
  Index dim() const { return dx + dy; }

  bool operator==(const JointGmm &other) const {
    if (dx != other.dx || dy != other.dy || weights != other.weights ||
        means != other.means ||
        covariances.size() != other.covariances.size())
      return false;
    for (size_t m = 0; m < covariances.size(); ++m)
      if (covariances[m] != other.covariances[m]) return false;
    return true;
  }
};

using JointGmmd = JointGmm<double>;

struct EmOptions {
  Index mixtures = 32;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;  // per-sample log-likelihood gain
  double covariance_floor = 1e-6;
  int kmeans_iters = 10;
};

template <typename Scalar>
struct EmFit {
  JointGmm<Scalar> model;
  // Log-likelihood of the data before the first M-step and after each one.
  std::vector<Scalar> log_likelihood;
  int iterations = 0;
};

namespace internal {

// splitmix64 with a hand-rolled uniform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  double uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  Index index(Index n) {
    Index k = static_cast<Index>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

 private:
  std::uint64_t state_;
};

template <typename Scalar>
void floor_covariance(typename JointGmm<Scalar>::Matrix *cov, Scalar floor) {
  using Matrix = typename JointGmm<Scalar>::Matrix;
  if (!cov->allFinite()) {
    throw Error(ErrorCode::kDegenerateCovariance, "non-finite covariance");
  }
  Matrix sym = (*cov + cov->transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kDegenerateCovariance,
                "eigendecomposition of covariance failed");
  }
  if (es.eigenvalues().minCoeff() >= floor) {
    *cov = sym;
    return;
  }
  auto lambda = es.eigenvalues().cwiseMax(floor);
  Matrix rebuilt = es.eigenvectors() * lambda.asDiagonal() *
                   es.eigenvectors().transpose();
  *cov = (rebuilt + rebuilt.transpose()) / Scalar(2);
}

template <typename Scalar>
struct GaussianTerm {
  Eigen::LLT<typename JointGmm<Scalar>::Matrix> llt;
  Scalar log_norm;  // log w - (d log 2pi + log det S) / 2
};

template <typename Scalar>
GaussianTerm<Scalar> make_term(Scalar weight,
                               const typename JointGmm<Scalar>::Matrix &cov) {
  GaussianTerm<Scalar> t{Eigen::LLT<typename JointGmm<Scalar>::Matrix>(cov),
                         Scalar(0)};
  if (t.llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kDegenerateCovariance,
                "covariance is not positive definite");
  }
  const Scalar log_det =
      Scalar(2) * t.llt.matrixLLT().diagonal().array().log().sum();
  const Scalar d = static_cast<Scalar>(cov.rows());
  t.log_norm = std::log(weight) -
               Scalar(0.5) * (d * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
                              log_det);
  return t;
}

// log(w_m N(row_n; mu_m, S_m)) for all rows and mixtures, N x M.
template <typename Scalar>
typename JointGmm<Scalar>::Matrix component_log_densities(
    const std::vector<GaussianTerm<Scalar>> &terms,
    const typename JointGmm<Scalar>::Matrix &means,
    const typename JointGmm<Scalar>::Matrix &data) {
  using Matrix = typename JointGmm<Scalar>::Matrix;
  const Index n = data.rows();
  const Index m_count = static_cast<Index>(terms.size());
  Matrix out(n, m_count);
  for (Index m = 0; m < m_count; ++m) {
    Matrix centered = (data.rowwise() - means.row(m)).transpose();
    terms[m].llt.matrixL().solveInPlace(centered);
    auto maha = centered.colwise().squaredNorm();
    out.col(m) = (terms[m].log_norm - Scalar(0.5) * maha.array()).transpose();
  }
  return out;
}

// Row-wise log-sum-exp; turns `log_dens` into normalized posteriors in place
// and returns the per-row log-likelihoods.
template <typename Scalar>
typename JointGmm<Scalar>::Vector normalize_rows(
    typename JointGmm<Scalar>::Matrix *log_dens) {
  const Index n = log_dens->rows();
  typename JointGmm<Scalar>::Vector ll(n);
  for (Index i = 0; i < n; ++i) {
    auto row = log_dens->row(i);
    const Scalar mx = row.maxCoeff();
    if (!std::isfinite(mx)) {
      throw Error(ErrorCode::kDegenerateCovariance,
                  "sample " + std::to_string(i) + " has zero likelihood");
    }
    row.array() = (row.array() - mx).exp();
    const Scalar s = row.sum();
    ll(i) = mx + std::log(s);
    row /= s;
  }
  return ll;
}

template <typename Scalar>
std::vector<GaussianTerm<Scalar>> make_terms(const JointGmm<Scalar> &model) {
  std::vector<GaussianTerm<Scalar>> terms;
  terms.reserve(model.covariances.size());
  for (Index m = 0; m < model.num_mixtures(); ++m)
    terms.push_back(make_term<Scalar>(model.weights(m), model.covariances[m]));
  return terms;
}

template <typename Scalar>
void check_data_dim(const JointGmm<Scalar> &model, Index cols) {
  if (cols != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "data has " + std::to_string(cols) + " columns, model expects " +
                    std::to_string(model.dim()));
  }
}

template <typename Scalar>
typename JointGmm<Scalar>::Matrix kmeans_pp(
    const typename JointGmm<Scalar>::Matrix &data, Index k, Rng *rng) {
  using Matrix = typename JointGmm<Scalar>::Matrix;
  using Vector = typename JointGmm<Scalar>::Vector;
  const Index n = data.rows();
  Matrix centers(k, data.cols());
  centers.row(0) = data.row(rng->index(n));
  Vector d2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const Scalar total = d2.sum();
    Index pick = n - 1;
    if (total > Scalar(0)) {
      const Scalar target = static_cast<Scalar>(rng->uniform()) * total;
      Scalar run = 0;
      for (Index i = 0; i < n; ++i) {
        run += d2(i);
        if (run > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng->index(n);
    }
    centers.row(c) = data.row(pick);
    d2 = d2.cwiseMin((data.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace internal

// Sum over rows of log sum_m w_m N(row; mu_m, S_m). Empty data gives 0.
template <typename Scalar>
Scalar log_likelihood(const JointGmm<Scalar> &model,
                      const typename JointGmm<Scalar>::Matrix &data) {
  internal::check_data_dim(model, data.cols());
  if (data.rows() == 0) return Scalar(0);
  auto dens = internal::component_log_densities(internal::make_terms(model),
                                                model.means, data);
  return internal::normalize_rows<Scalar>(&dens).sum();
}

// Posterior responsibilities P(m | row), N x M.
template <typename Scalar>
typename JointGmm<Scalar>::Matrix posteriors(
    const JointGmm<Scalar> &model,
    const typename JointGmm<Scalar>::Matrix &data) {
  internal::check_data_dim(model, data.cols());
  auto dens = internal::component_log_densities(internal::make_terms(model),
                                                model.means, data);
  internal::normalize_rows<Scalar>(&dens);
  return dens;
}

template <typename Scalar>
EmFit<Scalar> fit_em(const typename JointGmm<Scalar>::Matrix &data, Index dx,
                     const EmOptions &opts) {
  using Matrix = typename JointGmm<Scalar>::Matrix;
  using Vector = typename JointGmm<Scalar>::Vector;
  const Index n = data.rows();
  const Index d = data.cols();
  const Index k = opts.mixtures;
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "mixture count must be >= 1");
  if (dx < 1 || dx >= d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "source dimension " + std::to_string(dx) +
                    " does not split joint dimension " + std::to_string(d));
  }
  if (n < k || n < 1) {
    throw Error(ErrorCode::kTooFewSamples,
                std::to_string(n) + " samples for " + std::to_string(k) +
                    " mixtures");
  }
  if (!data.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, "joint vectors contain non-finite values");
  }
  const Scalar floor = static_cast<Scalar>(opts.covariance_floor);

  // k-means initialization.
  internal::Rng rng(opts.seed);
  Matrix centers = internal::kmeans_pp<Scalar>(data, k, &rng);
  std::vector<Index> assign(n, 0);
  for (int it = 0; it <= opts.kmeans_iters; ++it) {
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      Scalar best_d = std::numeric_limits<Scalar>::infinity();
      for (Index c = 0; c < k; ++c) {
        Scalar dd = (data.row(i) - centers.row(c)).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      assign[i] = best;
    }
    if (it == opts.kmeans_iters) break;
    Matrix sums = Matrix::Zero(k, d);
    Vector counts = Vector::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += data.row(i);
      counts(assign[i]) += Scalar(1);
    }
    for (Index c = 0; c < k; ++c)
      if (counts(c) > Scalar(0)) centers.row(c) = sums.row(c) / counts(c);
  }

  JointGmm<Scalar> model;
  model.dx = dx;
  model.dy = d - dx;
  model.means = centers;
  model.weights = Vector::Zero(k);
  model.covariances.assign(k, Matrix::Zero(d, d));
  const Vector global_mean = data.colwise().mean().transpose();
  Matrix global_centered = data.rowwise() - global_mean.transpose();
  const Matrix global_cov =
      global_centered.transpose() * global_centered / static_cast<Scalar>(n);
  std::vector<Index> counts(k, 0);
  for (Index i = 0; i < n; ++i) ++counts[assign[i]];
  for (Index c = 0; c < k; ++c) {
    model.weights(c) = static_cast<Scalar>(std::max<Index>(counts[c], 1));
    if (counts[c] >= 2) {
      Matrix members(counts[c], d);
      Index r = 0;
      for (Index i = 0; i < n; ++i)
        if (assign[i] == c) members.row(r++) = data.row(i);
      Matrix centered = members.rowwise() - model.means.row(c);
      model.covariances[c] =
          centered.transpose() * centered / static_cast<Scalar>(counts[c]);
    } else {
      model.covariances[c] = global_cov;
    }
    internal::floor_covariance<Scalar>(&model.covariances[c], floor);
  }
  model.weights /= model.weights.sum();

  // EM.
  EmFit<Scalar> fit;
  auto e_step = [&](Matrix *resp) {
    *resp = internal::component_log_densities(internal::make_terms(model),
                                              model.means, data);
    return internal::normalize_rows<Scalar>(resp).sum();
  };
  Matrix resp;
  Scalar ll_prev = e_step(&resp);
  fit.log_likelihood.push_back(ll_prev);
  for (int it = 1; it <= opts.max_iters; ++it) {
    const Vector nk = resp.colwise().sum().transpose();
    for (Index m = 0; m < k; ++m) {
      // A component that lost all support keeps its parameters.
      if (!(nk(m) > Scalar(0))) continue;
      model.means.row(m) = (resp.col(m).transpose() * data) / nk(m);
      Matrix centered = data.rowwise() - model.means.row(m);
      Matrix weighted = centered.array().colwise() * resp.col(m).array();
      model.covariances[m] = weighted.transpose() * centered / nk(m);
      internal::floor_covariance<Scalar>(&model.covariances[m], floor);
    }
    model.weights = nk / nk.sum();
    fit.iterations = it;
    const Scalar ll = e_step(&resp);
    fit.log_likelihood.push_back(ll);
    if ((ll - ll_prev) / static_cast<Scalar>(n) < static_cast<Scalar>(opts.tol)) break;
    ll_prev = ll;
  }
  fit.model = std::move(model);
  return fit;
}

// Precomputes the per-mixture regression matrices for repeated conversion.
template <typename Scalar>
class GmmConverter {
 public:
  using Matrix = typename JointGmm<Scalar>::Matrix;
  using Vector = typename JointGmm<Scalar>::Vector;

  explicit GmmConverter(const JointGmm<Scalar> &model) : model_(model) {
    const Index dx = model.dx, dy = model.dy;
    for (Index m = 0; m < model.num_mixtures(); ++m) {
      const Matrix &s = model.covariances[m];
      Matrix sxx = s.topLeftCorner(dx, dx);
      marginal_.push_back(internal::make_term<Scalar>(model.weights(m), sxx));
      // S_yx S_xx^-1 = (S_xx^-1 S_xy)^T
      regression_.push_back(
          marginal_.back().llt.solve(s.topRightCorner(dx, dy)).transpose());
    }
    x_means_ = model.means.leftCols(dx);
  }

  Index source_dim() const { return model_.dx; }
  Index target_dim() const { return model_.dy; }

  // Converts each row of `xs` (N x dx) to a target row (N x dy).
  Matrix convert_rows(const Matrix &xs) const {
    if (xs.cols() != model_.dx) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "source frame has dimension " + std::to_string(xs.cols()) +
                      ", model expects " + std::to_string(model_.dx));
    }
    Matrix post = internal::component_log_densities(marginal_, x_means_, xs);
    internal::normalize_rows<Scalar>(&post);
    Matrix out = Matrix::Zero(xs.rows(), model_.dy);
    for (Index m = 0; m < model_.num_mixtures(); ++m) {
      Matrix centered = xs.rowwise() - x_means_.row(m);
      Matrix pred = (centered * regression_[m].transpose()).rowwise() +
                    model_.means.row(m).rightCols(model_.dy);
      out += (pred.array().colwise() * post.col(m).array()).matrix();
    }
    return out;
  }

  Vector convert(const Vector &x) const {
    return convert_rows(x.transpose()).row(0).transpose();
  }

 private:
  JointGmm<Scalar> model_;
  Matrix x_means_;
  std::vector<internal::GaussianTerm<Scalar>> marginal_;
  std::vector<Matrix> regression_;
};

template <typename Scalar>
typename JointGmm<Scalar>::Vector convert_frame(
    const JointGmm<Scalar> &model, const typename JointGmm<Scalar>::Vector &x) {
  return GmmConverter<Scalar>(model).convert(x);
}

// Checks weights, shapes, symmetry and positive definiteness.
void validate_gmm(const JointGmmd &model);

// LGM1: "LGM1" u32 M, u32 dx, u32 dy, f64 weights[M],
// f64 means[M][dx+dy], f64 covariances[M][dx+dy][dx+dy], little-endian.
JointGmmd read_gmm(const std::filesystem::path &path);
void write_gmm(const std::filesystem::path &path, const JointGmmd &model);

}  // namespace elalign
