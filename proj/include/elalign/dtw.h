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

// Dynamic time warping with the symmetric step set {(1,0), (0,1), (1,1)},
// unweighted local costs and anchored endpoints.
//
// The local cost is supplied as a callable cost(i, j) so the same core serves
// mcep rows, lip crops and landmark sets. Ties in the recursion are broken in
// the fixed order diagonal > vertical (source advances) > horizontal (target
// advances), which makes the returned path reproducible bit for bit.

#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "elalign/error.h"
#include "elalign/seqio.h"

namespace elalign {

struct DtwConfig {
  // Sakoe-Chiba half-width: only cells with |i - j| <= band_radius are used.
  std::optional<Index> band_radius;
  // Keep the local and cumulative cost matrices in the result.
  bool keep_cost_matrix = false;
};

struct DtwResult {
  AlignmentPath path;
  double total_cost = 0.0;
  // Cumulative cost D(i, j); D(Ts-1, Tt-1) == total_cost.
  std::optional<Eigen::MatrixXd> cost_matrix;
  // Local distances; cells outside the band hold +inf.
  std::optional<Eigen::MatrixXd> local_cost;
};

namespace internal {

inline bool in_band(Index i, Index j, const std::optional<Index> &band) {
  return !band || std::abs(i - j) <= *band;
}

inline void check_dtw_input(Index ns, Index nt, const DtwConfig &config) {
  if (ns < 1 || nt < 1) {
    throw Error(ErrorCode::kEmptySequence,
                "DTW needs non-empty sequences, got lengths " +
                    std::to_string(ns) + " and " + std::to_string(nt));
  }
  if (config.band_radius) {
    if (*config.band_radius < 0 || *config.band_radius < std::abs(ns - nt)) {
      throw Error(ErrorCode::kBandInfeasible,
                  "band radius " + std::to_string(*config.band_radius) +
                      " cannot connect lengths " + std::to_string(ns) +
                      " and " + std::to_string(nt));
    }
  }
}

}  // namespace internal

template <typename CostFn>
DtwResult dtw_align(Index ns, Index nt, CostFn &&cost,
                    const DtwConfig &config = {}) {
  internal::check_dtw_input(ns, nt, config);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto &band = config.band_radius;

  Eigen::MatrixXd local = Eigen::MatrixXd::Constant(ns, nt, kInf);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(ns, nt, kInf);
  for (Index i = 0; i < ns; ++i) {
    for (Index j = 0; j < nt; ++j) {
      if (!internal::in_band(i, j, band)) continue;
      const double c = static_cast<double>(cost(i, j));
      local(i, j) = c;
      if (i == 0 && j == 0) {
        acc(i, j) = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = acc(i - 1, j - 1);
      if (i > 0 && acc(i - 1, j) < best) best = acc(i - 1, j);
      if (j > 0 && acc(i, j - 1) < best) best = acc(i, j - 1);
      acc(i, j) = c + best;
    }
  }

  std::vector<PathPoint> rev;
  rev.reserve(static_cast<size_t>(ns + nt));
  Index i = ns - 1, j = nt - 1;
  rev.push_back({i, j});
  while (i > 0 || j > 0) {
    Index bi = -1, bj = -1;
    double best = kInf;
    if (i > 0 && j > 0) { bi = i - 1; bj = j - 1; best = acc(bi, bj); }
    if (i > 0 && (bi < 0 || acc(i - 1, j) < best)) { bi = i - 1; bj = j; best = acc(bi, bj); }
    if (j > 0 && (bi < 0 || acc(i, j - 1) < best)) { bi = i; bj = j - 1; best = acc(bi, bj); }
    i = bi;
    j = bj;
    rev.push_back({i, j});
  }

  const double total = acc(ns - 1, nt - 1);
  if (!std::isfinite(total)) {
    throw Error(ErrorCode::kBandInfeasible, "no finite-cost path exists");
  }
  DtwResult result{AlignmentPath({rev.rbegin(), rev.rend()}), total,
                   std::nullopt, std::nullopt};
  if (config.keep_cost_matrix) {
    result.cost_matrix = std::move(acc);
    result.local_cost = std::move(local);
  }
  return result;
}

// DTW between the rows of two frame matrices under metric(row_a, row_b).
template <typename DerivedA, typename DerivedB, typename Metric>
DtwResult dtw_align_rows(const Eigen::MatrixBase<DerivedA> &src,
                         const Eigen::MatrixBase<DerivedB> &tgt,
                         Metric &&metric, const DtwConfig &config = {}) {
  return dtw_align(
      src.rows(), tgt.rows(),
      [&](Index i, Index j) { return metric(src.row(i), tgt.row(j)); },
      config);
}

// Exhaustive search over all monotone paths; test oracle only.
// Path costs accumulate in the same order as the recursion in dtw_align, so
// the two minima agree exactly.
template <typename CostFn>
DtwResult brute_force_align(Index ns, Index nt, CostFn &&cost) {
  if (ns < 1 || nt < 1) {
    throw Error(ErrorCode::kEmptySequence, "brute force needs non-empty input");
  }
  if (ns * nt > 10000) {
    throw Error(ErrorCode::kTooLarge,
                "brute force limited to Ts*Tt <= 1e4, got " +
                    std::to_string(ns * nt));
  }
  Eigen::MatrixXd local(ns, nt);
  for (Index i = 0; i < ns; ++i)
    for (Index j = 0; j < nt; ++j) local(i, j) = static_cast<double>(cost(i, j));

  std::vector<PathPoint> current{{0, 0}};
  std::vector<PathPoint> best_path;
  double best = std::numeric_limits<double>::infinity();

  auto search = [&](auto &&self, Index i, Index j, double sum) -> void {
    if (i == ns - 1 && j == nt - 1) {
      if (best_path.empty() || sum < best) {
        best = sum;
        best_path = current;
      }
      return;
    }
    constexpr Index kSteps[3][2] = {{1, 1}, {1, 0}, {0, 1}};
    for (const auto &step : kSteps) {
      Index ni = i + step[0], nj = j + step[1];
      if (ni >= ns || nj >= nt) continue;
      current.push_back({ni, nj});
      self(self, ni, nj, local(ni, nj) + sum);
      current.pop_back();
    }
  };
  search(search, 0, 0, local(0, 0));
  return DtwResult{AlignmentPath(std::move(best_path)), best, std::nullopt,
                   std::nullopt};
}

}  // namespace elalign
