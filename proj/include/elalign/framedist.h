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

// Frame-level distances for the three alignment modalities: mel-cepstral
// distortion between mcep frames, pixel MSE between lip crops and the
// centroid-relocated landmark distance between lip shapes.

#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "elalign/error.h"
#include "elalign/seqio.h"

namespace elalign {

// 10 / ln(10): converts a natural-log cepstral distance to decibels.
inline constexpr double kMcdScale = 10.0 / std::numbers::ln10;

struct ImageSize {
  Index height = 64;
  Index width = 64;
  bool operator==(const ImageSize &) const = default;
};

enum class MetricKind { kMcd, kPixelMse, kLandmark };

struct DistanceMetric {
  MetricKind kind = MetricKind::kMcd;
  bool include_c0 = false;      // kMcd
  ImageSize lip_size{64, 64};   // kPixelMse

  void validate() const {
    if (lip_size.height < 1 || lip_size.width < 1) {
      throw Error(ErrorCode::kInvalidArgument, "lip size must be at least 1x1");
    }
  }
};

// MCD in dB between two mcep frames. The sum runs over dimensions 1..D-1
// unless include_c0, in which case c0 participates as well.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mcd_frame(const Eigen::MatrixBase<DerivedA> &src,
                                    const Eigen::MatrixBase<DerivedB> &tgt,
                                    bool include_c0 = false) {
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(DerivedA);
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(DerivedB);
  using Scalar = typename DerivedA::Scalar;
  if (src.size() != tgt.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mcep frames have dimensions " + std::to_string(src.size()) +
                    " and " + std::to_string(tgt.size()));
  }
  const Index first = include_c0 ? 0 : 1;
  if (src.size() <= first) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mcep frame needs at least 2 coefficients when c0 is excluded");
  }
  const Index n = src.size() - first;
  Scalar sum = (src.tail(n).template cast<Scalar>() -
                tgt.tail(n).template cast<Scalar>())
                   .squaredNorm();
  return static_cast<Scalar>(kMcdScale) * std::sqrt(Scalar(2) * sum);
}

// Sum of a per-sub-frame metric over two stacked vectors made of
// sub_dim-sized pieces.
template <typename Metric, typename DerivedA, typename DerivedB>
double stacked_distance(Metric &&metric, const Eigen::MatrixBase<DerivedA> &a,
                        const Eigen::MatrixBase<DerivedB> &b, Index sub_dim) {
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(DerivedA);
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(DerivedB);
  if (sub_dim < 1 || a.size() % sub_dim != 0 || b.size() % sub_dim != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stacked vector length is not a multiple of the sub-frame "
                "dimension " + std::to_string(sub_dim));
  }
  const Index count_a = a.size() / sub_dim;
  const Index count_b = b.size() / sub_dim;
  if (count_a != count_b) {
    throw Error(ErrorCode::kStackSizeMismatch,
                "stacks hold " + std::to_string(count_a) + " and " +
                    std::to_string(count_b) + " sub-frames");
  }
  double total = 0.0;
  for (Index k = 0; k < count_a; ++k)
    total += metric(a.segment(k * sub_dim, sub_dim), b.segment(k * sub_dim, sub_dim));
  return total;
}

// Bilinear resampling with pixel-center alignment; intensities become reals.
Eigen::MatrixXd resize_bilinear(const Eigen::Ref<const GrayImage> &image,
                                ImageSize size);

// Mean squared difference of two equally sized real images.
double image_mse(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b);

// Both images are resized to target_size before the pixel-wise MSE.
double pixel_mse(const Eigen::Ref<const GrayImage> &a,
                 const Eigen::Ref<const GrayImage> &b, ImageSize target_size);

// Sum over landmark pairs of the Euclidean distance after moving each
// point set's centroid to the origin. Both sets must hold 20 points.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar landmark_distance(
    const Eigen::MatrixBase<DerivedA> &src,
    const Eigen::MatrixBase<DerivedB> &tgt) {
  using Scalar = typename DerivedA::Scalar;
  if (src.rows() != kNumLipLandmarks || tgt.rows() != kNumLipLandmarks ||
      src.cols() != 2 || tgt.cols() != 2) {
    throw Error(ErrorCode::kWrongPointCount,
                "landmark sets have " + std::to_string(src.rows()) + " and " +
                    std::to_string(tgt.rows()) + " points, expected " +
                    std::to_string(kNumLipLandmarks));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> a = src.template cast<Scalar>();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> b = tgt.template cast<Scalar>();
  a.rowwise() -= a.colwise().mean();
  b.rowwise() -= b.colwise().mean();
  return (a - b).rowwise().norm().sum();
}

inline double landmark_distance(const LandmarkFrame &src,
                                const LandmarkFrame &tgt) {
  return landmark_distance(src.points, tgt.points);
}

// Callable adaptor used by the DTW drivers on rows of frame matrices.
struct McdMetric {
  bool include_c0 = false;
  template <typename A, typename B>
  double operator()(const A &a, const B &b) const {
    return static_cast<double>(mcd_frame(a, b, include_c0));
  }
};

}  // namespace elalign
