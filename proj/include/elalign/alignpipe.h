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

// Utterance-level alignment drivers.
//
// mcep mode runs the refinement loop
//
//   DTW(source, target) -> joint vectors -> EM -> convert source -> DTW ...
//
// on silence-trimmed, delta-extended mceps, with the joint vectors always
// built from the original source features. Lip modes run one DTW over lip
// frames and project the lip-rate path onto acoustic frames.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elalign/dtw.h"
#include "elalign/framedist.h"
#include "elalign/jointgmm.h"
#include "elalign/seqio.h"

namespace elalign {

enum class Modality { kMcep, kLipRaw, kLipLandmark };

std::string_view modality_name(Modality m);

struct AlignConfig {
  Modality modality = Modality::kMcep;
  int iterations = 3;
  // Acoustic frames per lip frame.
  int stack_factor = 4;
  // Frames whose c0 falls this many dB below the utterance maximum are
  // dropped before mcep alignment.
  double silence_threshold_db = 40.0;
  bool include_c0 = false;
  ImageSize lip_size{64, 64};
  std::optional<Index> band_radius;
  // Rerun the loop `iterations` times for lip modalities as well.
  bool force_iterations = false;
  // Keep the final DTW's local cost matrix (modality frames).
  bool keep_cost_matrix = false;
  EmOptions gmm;

  void validate() const;
};

struct AlignmentOutput {
  AlignmentPath acoustic_path{{{0, 0}}};
  AlignmentPath modality_path{{{0, 0}}};
  std::vector<double> per_iteration_costs;
  // Kept acoustic frame indices (strictly increasing) for each side.
  std::vector<Index> src_kept;
  std::vector<Index> tgt_kept;
  std::vector<std::string> warnings;
  std::optional<Eigen::MatrixXd> local_cost;
};

struct SilenceRemoval {
  FeatureSequence kept;
  std::vector<Index> indices;
};

// Drops frames whose power proxy 10*c0/ln(10) lies more than
// threshold_db below the utterance maximum.
SilenceRemoval remove_silence(const FeatureSequence &seq,
                              double threshold_db = 40.0);

// [static | delta] with delta_t = (x_{t+1} - x_{t-1}) / 2 and replicated edges.
Eigen::MatrixXd add_deltas(const Eigen::MatrixXd &frames);
FeatureSequence add_deltas(const FeatureSequence &seq);

// Concatenates k consecutive frames; the tail remainder is dropped.
FeatureSequence stack_frames(const FeatureSequence &seq, int k);

// Turns an arbitrary list of grid points into a valid path over a
// ts x tt grid: points are clipped, made monotone by running maximum,
// deduplicated and joined by minimal connecting steps from (0,0) to
// (ts-1, tt-1).
AlignmentPath connect_points(const std::vector<PathPoint> &points, Index ts,
                             Index tt);

// Projects a path over stacked (lip-rate) frames onto acoustic frames:
// (i, j) becomes (k*i + r, k*j + r) for r < k, then connect_points.
AlignmentPath expand_path(const AlignmentPath &path, int k, Index ts_acoustic,
                          Index tt_acoustic);

// Rows are [src.row(p.src) | tgt.row(p.tgt)] for each path point.
Eigen::MatrixXd build_joint_vectors(const Eigen::MatrixXd &src,
                                    const Eigen::MatrixXd &tgt,
                                    const AlignmentPath &path);

// Features DTW sees in mcep mode: statics (c0 column removed unless
// include_c0) with their deltas.
Eigen::MatrixXd alignment_features(const Eigen::MatrixXd &statics,
                                   bool include_c0);

Eigen::MatrixXd to_matrix(const FeatureSequence &seq);

AlignmentOutput iterative_align(const FeatureSequence &src_mcep,
                                const FeatureSequence &tgt_mcep,
                                const AlignConfig &config);

AlignmentOutput lip_align(const LipLandmarkSequence &src_lip,
                          const LipLandmarkSequence &tgt_lip,
                          const FeatureSequence &src_mcep,
                          const FeatureSequence &tgt_mcep,
                          const AlignConfig &config);

AlignmentOutput lip_align(const LipImageSequence &src_lip,
                          const LipImageSequence &tgt_lip,
                          const FeatureSequence &src_mcep,
                          const FeatureSequence &tgt_mcep,
                          const AlignConfig &config);

}  // namespace elalign
