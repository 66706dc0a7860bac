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

// Alignment-matrix rendering to binary PPM (P6).
//
// Source frames run left to right, target frames bottom to top. The cost
// matrix is drawn as a grayscale heatmap (dark = low cost, white = not
// finite), labeled boundaries as dashed grey lines, the path in blue.

#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "elalign/seqio.h"

namespace elalign {

struct PlotOptions {
  int scale = 2;  // pixels per frame
  double src_period_ms = 5.0;
  double tgt_period_ms = 5.0;
  const BoundarySegmentation *src_bounds = nullptr;
  const BoundarySegmentation *tgt_bounds = nullptr;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb &) const = default;
};

inline constexpr Rgb kPathColor{0, 0, 255};
inline constexpr Rgb kBoundaryColor{128, 128, 128};

// Returns the complete P6 file contents.
std::string render_alignment_ppm(const Eigen::MatrixXd &cost,
                                 const AlignmentPath &path,
                                 const PlotOptions &options);

}  // namespace elalign
