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

#include "elalign/framedist.h"

#include <algorithm>

namespace elalign {

namespace {

struct Tap {
  Index lo;
  Index hi;
  double frac;
};

Tap sample_position(Index out, Index in_size, Index out_size) {
  double pos = (static_cast<double>(out) + 0.5) *
                   (static_cast<double>(in_size) / static_cast<double>(out_size)) -
               0.5;
  pos = std::clamp(pos, 0.0, static_cast<double>(in_size - 1));
  Index lo = static_cast<Index>(std::floor(pos));
  Index hi = std::min(lo + 1, in_size - 1);
  return {lo, hi, pos - static_cast<double>(lo)};
}

}  // namespace

Eigen::MatrixXd resize_bilinear(const Eigen::Ref<const GrayImage> &image,
                                ImageSize size) {
  if (image.rows() < 1 || image.cols() < 1) {
    throw Error(ErrorCode::kEmptyImage, "cannot resize an empty image");
  }
  if (size.height < 1 || size.width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "target size must be at least 1x1");
  }
  Eigen::MatrixXd out(size.height, size.width);
  for (Index y = 0; y < size.height; ++y) {
    Tap ty = sample_position(y, image.rows(), size.height);
    for (Index x = 0; x < size.width; ++x) {
      Tap tx = sample_position(x, image.cols(), size.width);
      // lerp form keeps uniform regions exactly uniform
      double p00 = image(ty.lo, tx.lo), p01 = image(ty.lo, tx.hi);
      double p10 = image(ty.hi, tx.lo), p11 = image(ty.hi, tx.hi);
      double top = p00 + tx.frac * (p01 - p00);
      double bottom = p10 + tx.frac * (p11 - p10);
      out(y, x) = top + ty.frac * (bottom - top);
    }
  }
  return out;
}

double image_mse(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "images differ in size");
  }
  if (a.size() == 0) throw Error(ErrorCode::kEmptyImage, "empty image");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double pixel_mse(const Eigen::Ref<const GrayImage> &a,
                 const Eigen::Ref<const GrayImage> &b, ImageSize target_size) {
  if (a.size() == 0 || b.size() == 0) {
    throw Error(ErrorCode::kEmptyImage, "pixel_mse on an empty image");
  }
  return image_mse(resize_bilinear(a, target_size),
                   resize_bilinear(b, target_size));
}

}  // namespace elalign
