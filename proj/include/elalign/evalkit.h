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

#pragma once

#include <string>
#include <vector>

#include "elalign/seqio.h"

namespace elalign {

// Fraction of path points (i, j) whose source frame center (i + 0.5) * period
// and target frame center fall in segments with the same index. Points
// outside every segment count as incorrect.
double correct_ratio(const AlignmentPath &path,
                     const BoundarySegmentation &src_bounds,
                     const BoundarySegmentation &tgt_bounds,
                     double src_period_ms, double tgt_period_ms);

struct McdEvaluation {
  double mcd_db = 0.0;
  // DTW path over the non-silent frames, lifted back to original indices.
  AlignmentPath path{{{0, 0}}};
};

// Utterance MCD: silence-trim both sides, DTW with the MCD metric, average
// the frame MCD along the path.
McdEvaluation eval_mcd_detailed(const FeatureSequence &converted,
                                const FeatureSequence &target,
                                bool include_c0 = false,
                                double silence_threshold_db = 40.0);

inline double eval_mcd(const FeatureSequence &converted,
                       const FeatureSequence &target, bool include_c0 = false) {
  return eval_mcd_detailed(converted, target, include_c0).mcd_db;
}

// RMSE in Hz over path points where both F0 values (column 0) are > 0.
double eval_f0rmse(const FeatureSequence &converted_f0,
                   const FeatureSequence &target_f0, const AlignmentPath &path);

struct EvalRow {
  std::string utterance_id;
  std::string metric;
  double value = 0.0;
};

class EvalReport {
 public:
  void add(std::string id, std::string metric, double value);
  const std::vector<EvalRow> &rows() const { return rows_; }
  // Metric names in first-appearance order with their arithmetic means.
  std::vector<std::pair<std::string, double>> aggregate() const;
  // id<TAB>metric<TAB>value per row, then AGGREGATE<TAB>metric<TAB>mean.
  std::string to_tsv() const;

 private:
  std::vector<EvalRow> rows_;
};

}  // namespace elalign
