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

#include "elalign/evalkit.h"

#include <cmath>

#include "elalign/alignpipe.h"
#include "elalign/dtw.h"
#include "elalign/framedist.h"

namespace elalign {

double correct_ratio(const AlignmentPath &path,
                     const BoundarySegmentation &src_bounds,
                     const BoundarySegmentation &tgt_bounds,
                     double src_period_ms, double tgt_period_ms) {
  if (src_bounds.size() != tgt_bounds.size()) {
    throw Error(ErrorCode::kSegmentCountMismatch,
                "source has " + std::to_string(src_bounds.size()) +
                    " segments, target has " +
                    std::to_string(tgt_bounds.size()));
  }
  if (!(src_period_ms > 0.0) || !(tgt_period_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "frame periods must be > 0");
  }
  Index correct = 0;
  for (const PathPoint &p : path.points()) {
    const Index s = src_bounds.find((static_cast<double>(p.src) + 0.5) * src_period_ms);
    const Index t = tgt_bounds.find((static_cast<double>(p.tgt) + 0.5) * tgt_period_ms);
    if (s >= 0 && s == t) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(path.size());
}

McdEvaluation eval_mcd_detailed(const FeatureSequence &converted,
                                const FeatureSequence &target, bool include_c0,
                                double silence_threshold_db) {
  if (converted.num_frames() == 0 || target.num_frames() == 0) {
    throw Error(ErrorCode::kAllSilent, "cannot evaluate an empty sequence");
  }
  if (converted.dim() != target.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "converted and target mceps differ in dimension");
  }
  FeatureSequence conv = converted, tgt = target;
  conv.kind = tgt.kind = FeatureKind::kMcep;
  SilenceRemoval cs = remove_silence(conv, silence_threshold_db);
  SilenceRemoval ts = remove_silence(tgt, silence_threshold_db);
  const Eigen::MatrixXd a = to_matrix(cs.kept);
  const Eigen::MatrixXd b = to_matrix(ts.kept);
  const McdMetric metric{include_c0};
  DtwResult r = dtw_align_rows(a, b, metric);
  double sum = 0.0;
  std::vector<PathPoint> lifted;
  for (const PathPoint &p : r.path.points()) {
    sum += metric(a.row(p.src), b.row(p.tgt));
    lifted.push_back({cs.indices[p.src], ts.indices[p.tgt]});
  }
  return {sum / static_cast<double>(r.path.size()),
          connect_points(lifted, converted.num_frames(), target.num_frames())};
}

double eval_f0rmse(const FeatureSequence &converted_f0,
                   const FeatureSequence &target_f0, const AlignmentPath &path) {
  if (path.src_length() > converted_f0.num_frames() ||
      path.tgt_length() > target_f0.num_frames()) {
    throw Error(ErrorCode::kPathOutOfRange,
                "path exceeds the F0 sequences it indexes");
  }
  double sum = 0.0;
  Index count = 0;
  for (const PathPoint &p : path.points()) {
    const double a = converted_f0.frames(p.src, 0);
    const double b = target_f0.frames(p.tgt, 0);
    if (a > 0.0 && b > 0.0) {
      sum += (a - b) * (a - b);
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kNoVoicedOverlap,
                "no path point is voiced on both sides");
  }
  return std::sqrt(sum / static_cast<double>(count));
}

void EvalReport::add(std::string id, std::string metric, double value) {
  rows_.push_back({std::move(id), std::move(metric), value});
}

std::vector<std::pair<std::string, double>> EvalReport::aggregate() const {
  std::vector<std::pair<std::string, double>> out;
  std::vector<Index> counts;
  for (const EvalRow &row : rows_) {
    size_t k = 0;
    while (k < out.size() && out[k].first != row.metric) ++k;
    if (k == out.size()) {
      out.emplace_back(row.metric, 0.0);
      counts.push_back(0);
    }
    out[k].second += row.value;
    ++counts[k];
  }
  for (size_t k = 0; k < out.size(); ++k)
    out[k].second /= static_cast<double>(counts[k]);
  return out;
}

std::string EvalReport::to_tsv() const {
  std::string out;
  for (const EvalRow &row : rows_)
    out += row.utterance_id + "\t" + row.metric + "\t" + format_real(row.value) + "\n";
  for (const auto &[metric, mean] : aggregate())
    out += "AGGREGATE\t" + metric + "\t" + format_real(mean) + "\n";
  return out;
}

}  // namespace elalign
