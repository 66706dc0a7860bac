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

#include "elalign/plot.h"

#include <cmath>
#include <limits>
#include <vector>

namespace elalign {

namespace {

class Canvas {
 public:
  Canvas(Index width, Index height)
      : width_(width), height_(height),
        pixels_(static_cast<size_t>(width * height)) {}

  void set(Index x, Index y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    pixels_[static_cast<size_t>(y * width_ + x)] = c;
  }

  std::string to_ppm() const {
    std::string out = "P6\n" + std::to_string(width_) + " " +
                      std::to_string(height_) + "\n255\n";
    out.reserve(out.size() + pixels_.size() * 3);
    for (const Rgb &c : pixels_) {
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
    }
    return out;
  }

 private:
  Index width_, height_;
  std::vector<Rgb> pixels_;
};

}  // namespace

std::string render_alignment_ppm(const Eigen::MatrixXd &cost,
                                 const AlignmentPath &path,
                                 const PlotOptions &options) {
  if (options.scale < 1) {
    throw Error(ErrorCode::kInvalidArgument, "plot scale must be >= 1");
  }
  if (cost.rows() < 1 || cost.cols() < 1) {
    throw Error(ErrorCode::kEmptySequence, "empty cost matrix");
  }
  if (path.src_length() > cost.rows() || path.tgt_length() > cost.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "path reaches (" + std::to_string(path.src_length() - 1) + "," +
                    std::to_string(path.tgt_length() - 1) +
                    ") outside the " + std::to_string(cost.rows()) + "x" +
                    std::to_string(cost.cols()) + " cost matrix");
  }
  const Index ts = cost.rows(), tt = cost.cols();
  const int s = options.scale;
  Canvas canvas(ts * s, tt * s);
  // Target frame j occupies rows counted from the bottom.
  auto cell_y = [&](Index j) { return (tt - 1 - j) * s; };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < ts; ++i)
    for (Index j = 0; j < tt; ++j)
      if (std::isfinite(cost(i, j))) {
        lo = std::min(lo, cost(i, j));
        hi = std::max(hi, cost(i, j));
      }
  const double span = hi > lo ? hi - lo : 1.0;
  for (Index i = 0; i < ts; ++i) {
    for (Index j = 0; j < tt; ++j) {
      Rgb c{255, 255, 255};
      if (std::isfinite(cost(i, j))) {
        auto v = static_cast<std::uint8_t>(
            std::lround(255.0 * (cost(i, j) - lo) / span));
        c = {v, v, v};
      }
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx) canvas.set(i * s + dx, cell_y(j) + dy, c);
    }
  }

  constexpr int kDash = 3;
  if (options.src_bounds) {
    for (const Segment &seg : options.src_bounds->segments) {
      for (double ms : {seg.start_ms, seg.end_ms}) {
        const Index x = std::lround(ms / options.src_period_ms * s);
        for (Index y = 0; y < tt * s; ++y)
          if ((y / kDash) % 2 == 0) canvas.set(x, y, kBoundaryColor);
      }
    }
  }
  if (options.tgt_bounds) {
    for (const Segment &seg : options.tgt_bounds->segments) {
      for (double ms : {seg.start_ms, seg.end_ms}) {
        const Index y = tt * s - std::lround(ms / options.tgt_period_ms * s);
        for (Index x = 0; x < ts * s; ++x)
          if ((x / kDash) % 2 == 0) canvas.set(x, y, kBoundaryColor);
      }
    }
  }

  for (const PathPoint &p : path.points())
    for (int dy = 0; dy < s; ++dy)
      for (int dx = 0; dx < s; ++dx)
        canvas.set(p.src * s + dx, cell_y(p.tgt) + dy, kPathColor);
  return canvas.to_ppm();
}

}  // namespace elalign
