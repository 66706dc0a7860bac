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

#include "elalign/alignpipe.h"

#include <algorithm>
#include <cstdlib>
#include <functional>

namespace elalign {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kMcep: return "mcep";
    case Modality::kLipRaw: return "lip-raw";
    case Modality::kLipLandmark: return "lip-landmark";
  }
  return "unknown";
}

void AlignConfig::validate() const {
  if (iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  }
  if (stack_factor < 1) {
    throw Error(ErrorCode::kInvalidArgument, "stack factor must be >= 1");
  }
  if (lip_size.height < 1 || lip_size.width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "lip size must be at least 1x1");
  }
}

SilenceRemoval remove_silence(const FeatureSequence &seq, double threshold_db) {
  if (seq.kind != FeatureKind::kMcep) {
    throw Error(ErrorCode::kWrongFeatureKind,
                "silence removal needs an mcep sequence");
  }
  if (seq.num_frames() == 0) {
    throw Error(ErrorCode::kAllSilent, "empty sequence");
  }
  const auto c0 = seq.frames.col(0).cast<double>();
  const double max_db = kMcdScale * c0.maxCoeff();
  SilenceRemoval out;
  for (Index t = 0; t < seq.num_frames(); ++t) {
    if (max_db - kMcdScale * c0(t) <= threshold_db) out.indices.push_back(t);
  }
  if (out.indices.empty()) {
    throw Error(ErrorCode::kAllSilent, "every frame is below the threshold");
  }
  out.kept.frame_period_ms = seq.frame_period_ms;
  out.kept.kind = seq.kind;
  out.kept.frames.resize(static_cast<Index>(out.indices.size()), seq.dim());
  for (size_t k = 0; k < out.indices.size(); ++k)
    out.kept.frames.row(static_cast<Index>(k)) = seq.frames.row(out.indices[k]);
  return out;
}

Eigen::MatrixXd add_deltas(const Eigen::MatrixXd &frames) {
  const Index t = frames.rows(), d = frames.cols();
  Eigen::MatrixXd out(t, 2 * d);
  out.leftCols(d) = frames;
  for (Index i = 0; i < t; ++i) {
    const Index prev = std::max<Index>(i - 1, 0);
    const Index next = std::min<Index>(i + 1, t - 1);
    out.row(i).rightCols(d) = 0.5 * (frames.row(next) - frames.row(prev));
  }
  return out;
}

FeatureSequence add_deltas(const FeatureSequence &seq) {
  FeatureSequence out;
  out.frame_period_ms = seq.frame_period_ms;
  out.kind = seq.kind;
  out.frames = add_deltas(to_matrix(seq)).cast<float>();
  return out;
}

FeatureSequence stack_frames(const FeatureSequence &seq, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "stack factor must be >= 1");
  const Index t_out = seq.num_frames() / k;
  const Index d = seq.dim();
  FeatureSequence out;
  out.kind = seq.kind;
  out.frame_period_ms = seq.frame_period_ms * k;
  out.frames.resize(t_out, d * k);
  for (Index i = 0; i < t_out; ++i)
    for (int r = 0; r < k; ++r)
      out.frames.row(i).segment(r * d, d) = seq.frames.row(i * k + r);
  return out;
}

AlignmentPath connect_points(const std::vector<PathPoint> &points, Index ts,
                             Index tt) {
  if (ts < 1 || tt < 1) {
    throw Error(ErrorCode::kPathOutOfRange, "target grid is empty");
  }
  std::vector<PathPoint> out{{0, 0}};
  auto step_to = [&](PathPoint to) {
    PathPoint cur = out.back();
    while (cur.src < to.src || cur.tgt < to.tgt) {
      if (cur.src < to.src) ++cur.src;
      if (cur.tgt < to.tgt) ++cur.tgt;
      out.push_back(cur);
    }
  };
  PathPoint floor{0, 0};
  for (PathPoint p : points) {
    p.src = std::clamp<Index>(p.src, 0, ts - 1);
    p.tgt = std::clamp<Index>(p.tgt, 0, tt - 1);
    floor.src = std::max(floor.src, p.src);
    floor.tgt = std::max(floor.tgt, p.tgt);
    step_to(floor);
  }
  step_to({ts - 1, tt - 1});
  return AlignmentPath(std::move(out));
}

AlignmentPath expand_path(const AlignmentPath &path, int k, Index ts_acoustic,
                          Index tt_acoustic) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "stack factor must be >= 1");
  if (ts_acoustic < 1 || tt_acoustic < 1) {
    throw Error(ErrorCode::kPathOutOfRange, "acoustic lengths must be >= 1");
  }
  // One lip frame past floor(T/k) is tolerated and clipped.
  if (path.src_length() - 1 > ts_acoustic / k ||
      path.tgt_length() - 1 > tt_acoustic / k) {
    throw Error(ErrorCode::kPathOutOfRange,
                "path reaches (" + std::to_string(path.src_length() - 1) + "," +
                    std::to_string(path.tgt_length() - 1) + ") but acoustic "
                    "lengths " + std::to_string(ts_acoustic) + "," +
                    std::to_string(tt_acoustic) + " hold fewer stacks");
  }
  std::vector<PathPoint> expanded;
  expanded.reserve(static_cast<size_t>(path.size() * k));
  for (const PathPoint &p : path.points())
    for (int r = 0; r < k; ++r) expanded.push_back({k * p.src + r, k * p.tgt + r});
  return connect_points(expanded, ts_acoustic, tt_acoustic);
}

Eigen::MatrixXd build_joint_vectors(const Eigen::MatrixXd &src,
                                    const Eigen::MatrixXd &tgt,
                                    const AlignmentPath &path) {
  if (path.src_length() > src.rows() || path.tgt_length() > tgt.rows()) {
    throw Error(ErrorCode::kPathOutOfRange,
                "path exceeds the feature sequences it pairs");
  }
  Eigen::MatrixXd joint(path.size(), src.cols() + tgt.cols());
  for (Index k = 0; k < path.size(); ++k) {
    joint.row(k).head(src.cols()) = src.row(path[k].src);
    joint.row(k).tail(tgt.cols()) = tgt.row(path[k].tgt);
  }
  return joint;
}

Eigen::MatrixXd alignment_features(const Eigen::MatrixXd &statics,
                                   bool include_c0) {
  if (include_c0) return add_deltas(statics);
  if (statics.cols() < 2) {
    throw Error(ErrorCode::kDimensionMismatch,
                "need at least 2 mcep coefficients when c0 is excluded");
  }
  return add_deltas(Eigen::MatrixXd(statics.rightCols(statics.cols() - 1)));
}

Eigen::MatrixXd to_matrix(const FeatureSequence &seq) {
  return seq.frames.cast<double>();
}

namespace {

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> v(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

DtwConfig dtw_config(const AlignConfig &config) {
  DtwConfig dc;
  dc.band_radius = config.band_radius;
  dc.keep_cost_matrix = config.keep_cost_matrix;
  return dc;
}

void check_mcep(const FeatureSequence &seq, const char *side) {
  if (seq.kind != FeatureKind::kMcep) {
    throw Error(ErrorCode::kWrongFeatureKind,
                std::string(side) + " features are not mceps");
  }
}

// Fits the joint model on aligned features and converts the whole source.
Eigen::MatrixXd convert_source(const Eigen::MatrixXd &src_feat,
                               const Eigen::MatrixXd &tgt_feat,
                               const AlignmentPath &path,
                               const EmOptions &opts) {
  Eigen::MatrixXd joint = build_joint_vectors(src_feat, tgt_feat, path);
  EmFit<double> fit = fit_em<double>(joint, src_feat.cols(), opts);
  return GmmConverter<double>(fit.model).convert_rows(src_feat);
}

// Runs the lip DTW (once, or `iterations` times with the acoustic loop
// alongside when forced) and projects the result onto acoustic frames.
AlignmentOutput lip_loop(Index ls, Index lt,
                         const std::function<double(Index, Index)> &cost,
                         const FeatureSequence &src_mcep,
                         const FeatureSequence &tgt_mcep,
                         const AlignConfig &config) {
  config.validate();
  if (ls < 1 || lt < 1) {
    throw Error(ErrorCode::kEmptySequence, "lip sequences must be non-empty");
  }
  const int k = config.stack_factor;
  AlignmentOutput out;
  auto check_length = [&](Index lips, Index acoustic, const char *side) {
    const Index stacks = acoustic / k;
    const Index diff = std::abs(stacks - lips);
    if (diff > 1) {
      throw Error(ErrorCode::kLengthMismatch,
                  std::string(side) + ": " + std::to_string(lips) +
                      " lip frames vs " + std::to_string(stacks) +
                      " acoustic stacks of " + std::to_string(k));
    }
    if (diff == 1) {
      out.warnings.push_back(std::string(side) + ": " + std::to_string(lips) +
                             " lip frames vs " + std::to_string(stacks) +
                             " acoustic stacks; path clipped");
    }
  };
  check_length(ls, src_mcep.num_frames(), "source");
  check_length(lt, tgt_mcep.num_frames(), "target");

  const int runs = config.force_iterations ? config.iterations : 1;
  Eigen::MatrixXd src_feat, tgt_feat;
  if (runs > 1) {
    src_feat = alignment_features(to_matrix(src_mcep), config.include_c0);
    tgt_feat = alignment_features(to_matrix(tgt_mcep), config.include_c0);
  }
  for (int it = 0; it < runs; ++it) {
    DtwResult r = dtw_align(ls, lt, cost, dtw_config(config));
    out.per_iteration_costs.push_back(r.total_cost);
    out.modality_path = r.path;
    out.acoustic_path = expand_path(r.path, k, src_mcep.num_frames(),
                                    tgt_mcep.num_frames());
    if (r.local_cost) out.local_cost = std::move(r.local_cost);
    if (it + 1 < runs) {
      // The converted source has no route back into the lip distance.
      convert_source(src_feat, tgt_feat, out.acoustic_path, config.gmm);
    }
  }
  out.src_kept = iota_indices(src_mcep.num_frames());
  out.tgt_kept = iota_indices(tgt_mcep.num_frames());
  return out;
}

}  // namespace

AlignmentOutput iterative_align(const FeatureSequence &src_mcep,
                                const FeatureSequence &tgt_mcep,
                                const AlignConfig &config) {
  config.validate();
  if (config.modality != Modality::kMcep) {
    throw Error(ErrorCode::kInvalidArgument,
                "iterative_align runs the mcep modality only");
  }
  check_mcep(src_mcep, "source");
  check_mcep(tgt_mcep, "target");
  SilenceRemoval src = remove_silence(src_mcep, config.silence_threshold_db);
  SilenceRemoval tgt = remove_silence(tgt_mcep, config.silence_threshold_db);

  const Eigen::MatrixXd src_feat =
      alignment_features(to_matrix(src.kept), config.include_c0);
  const Eigen::MatrixXd tgt_feat =
      alignment_features(to_matrix(tgt.kept), config.include_c0);
  const Index static_dim = src_feat.cols() / 2;
  const McdMetric metric{true};

  AlignmentOutput out;
  Eigen::MatrixXd current = src_feat;
  for (int it = 0; it < config.iterations; ++it) {
    DtwResult r = dtw_align_rows(current, tgt_feat, metric, dtw_config(config));
    out.per_iteration_costs.push_back(r.total_cost);
    out.modality_path = r.path;
    if (r.local_cost) out.local_cost = std::move(r.local_cost);
    if (it + 1 == config.iterations) break;
    Eigen::MatrixXd converted =
        convert_source(src_feat, tgt_feat, r.path, config.gmm);
    current = add_deltas(Eigen::MatrixXd(converted.leftCols(static_dim)));
  }

  std::vector<PathPoint> lifted;
  lifted.reserve(out.modality_path.points().size());
  for (const PathPoint &p : out.modality_path.points())
    lifted.push_back({src.indices[p.src], tgt.indices[p.tgt]});
  out.acoustic_path =
      connect_points(lifted, src_mcep.num_frames(), tgt_mcep.num_frames());
  out.src_kept = std::move(src.indices);
  out.tgt_kept = std::move(tgt.indices);
  return out;
}

AlignmentOutput lip_align(const LipLandmarkSequence &src_lip,
                          const LipLandmarkSequence &tgt_lip,
                          const FeatureSequence &src_mcep,
                          const FeatureSequence &tgt_mcep,
                          const AlignConfig &config) {
  if (config.modality != Modality::kLipLandmark) {
    throw Error(ErrorCode::kInvalidArgument,
                "landmark sequences need the lip-landmark modality");
  }
  auto cost = [&](Index i, Index j) {
    return landmark_distance(src_lip.frames[i], tgt_lip.frames[j]);
  };
  return lip_loop(src_lip.size(), tgt_lip.size(), cost, src_mcep, tgt_mcep,
                  config);
}

AlignmentOutput lip_align(const LipImageSequence &src_lip,
                          const LipImageSequence &tgt_lip,
                          const FeatureSequence &src_mcep,
                          const FeatureSequence &tgt_mcep,
                          const AlignConfig &config) {
  if (config.modality != Modality::kLipRaw) {
    throw Error(ErrorCode::kInvalidArgument,
                "lip image sequences need the lip-raw modality");
  }
  config.validate();
  auto resize_all = [&](const LipImageSequence &seq) {
    if (seq.size() > 0 && (seq.height < 1 || seq.width < 1)) {
      throw Error(ErrorCode::kEmptyImage, "lip images have zero size");
    }
    std::vector<Eigen::MatrixXd> frames;
    frames.reserve(static_cast<size_t>(seq.size()));
    for (Index i = 0; i < seq.size(); ++i)
      frames.push_back(resize_bilinear(seq.frame(i), config.lip_size));
    return frames;
  };
  const auto src = resize_all(src_lip);
  const auto tgt = resize_all(tgt_lip);
  auto cost = [&](Index i, Index j) { return image_mse(src[i], tgt[j]); };
  return lip_loop(src_lip.size(), tgt_lip.size(), cost, src_mcep, tgt_mcep,
                  config);
}

}  // namespace elalign
