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

// Corpus containers and their on-disk formats.
//
//   FSQ1  feature matrix     "FSQ1" u32 T, u32 D, f64 frame_period_ms,
//                            T*D float32 row-major (all little-endian)
//   LIM1  lip image stack    "LIM1" u32 N, u32 H, u32 W, u32 channels (= 1),
//                            N*H*W uint8
//   LMK   landmark CSV       frame,t_ms,x1,y1,...,x20,y20
//   LAB   boundary TSV       start_ms<TAB>end_ms<TAB>label
//   PATH  alignment CSV      src,tgt
//   manifest TSV             id<TAB>role:path<TAB>role:path...

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elalign/error.h"

namespace elalign {

using Index = Eigen::Index;

// Row-major float storage, same layout as the FSQ1 payload.
using FrameMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureKind { kMcep, kF0, kAp, kOther };

struct FeatureSequence {
  FrameMatrix frames;
  double frame_period_ms = 5.0;
  FeatureKind kind = FeatureKind::kOther;

  Index num_frames() const { return frames.rows(); }
  Index dim() const { return frames.cols(); }
};

constexpr int kNumLipLandmarks = 20;

// N x 2 (x, y) pixel coordinates.
using LandmarkPoints = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct LandmarkFrame {
  std::int64_t frame = 0;
  double t_ms = 0.0;
  LandmarkPoints points = LandmarkPoints::Zero(kNumLipLandmarks, 2);
};

struct LipLandmarkSequence {
  std::vector<LandmarkFrame> frames;
  double video_fps = 20.0;

  Index size() const { return static_cast<Index>(frames.size()); }
};

using GrayImage =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LipImageSequence {
  Index num_frames = 0;
  Index height = 0;
  Index width = 0;
  std::vector<std::uint8_t> pixels;  // N*H*W
  double video_fps = 20.0;

  Index size() const { return num_frames; }
  Eigen::Map<const GrayImage> frame(Index i) const {
    return Eigen::Map<const GrayImage>(pixels.data() + i * height * width,
                                       height, width);
  }
  void append(const GrayImage &image);
};

struct Segment {
  double start_ms = 0.0;
  double end_ms = 0.0;
  std::string label;
};

struct BoundarySegmentation {
  std::vector<Segment> segments;

  Index size() const { return static_cast<Index>(segments.size()); }
  // Index of the segment containing t (start <= t < end), or -1.
  Index find(double t_ms) const;
};

// Sorts by start time and checks start < end and no overlap.
void validate_segmentation(BoundarySegmentation *seg);

struct PathPoint {
  Index src = 0;
  Index tgt = 0;
  bool operator==(const PathPoint &) const = default;
};

// Monotone warping path from (0, 0); every step is (1,0), (0,1) or (1,1).
// The constructor rejects anything else with kInvalidPath.
class AlignmentPath {
 public:
  explicit AlignmentPath(std::vector<PathPoint> points);

  const std::vector<PathPoint> &points() const { return points_; }
  Index size() const { return static_cast<Index>(points_.size()); }
  const PathPoint &operator[](Index i) const { return points_[i]; }
  Index src_length() const { return points_.back().src + 1; }
  Index tgt_length() const { return points_.back().tgt + 1; }

  bool operator==(const AlignmentPath &) const = default;

 private:
  std::vector<PathPoint> points_;
};

enum class Role {
  kSrcMcep,
  kTgtMcep,
  kSrcF0,
  kTgtF0,
  kSrcLmk,
  kTgtLmk,
  kSrcLimg,
  kTgtLimg,
  kSrcLab,
  kTgtLab,
};

std::string_view role_name(Role role);

struct ManifestEntry {
  std::string id;
  // Paths as written in the manifest; relative ones resolve against the
  // manifest's directory.
  std::map<Role, std::filesystem::path> files;

  bool has(Role role) const { return files.count(role) != 0; }
};

struct PairManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry &entry, Role role) const;
};

FeatureSequence read_feature_sequence(const std::filesystem::path &path,
                                      FeatureKind kind = FeatureKind::kOther);
void write_feature_sequence(const std::filesystem::path &path,
                            const FeatureSequence &seq);

LipLandmarkSequence read_landmarks(const std::filesystem::path &path,
                                   double video_fps = 20.0);
void write_landmarks(const std::filesystem::path &path,
                     const LipLandmarkSequence &seq);

LipImageSequence read_lip_images(const std::filesystem::path &path,
                                 double video_fps = 20.0);
void write_lip_images(const std::filesystem::path &path,
                      const LipImageSequence &seq);

BoundarySegmentation read_boundaries(const std::filesystem::path &path);
void write_boundaries(const std::filesystem::path &path,
                      const BoundarySegmentation &seg);

AlignmentPath read_path(const std::filesystem::path &path);
void write_path(const std::filesystem::path &path, const AlignmentPath &ali);

// Checks ids are unique and every referenced file exists.
PairManifest read_manifest(const std::filesystem::path &path);
void write_manifest(const std::filesystem::path &path,
                    const PairManifest &manifest);

// Writes to a sibling temporary file and renames over the destination.
void write_file_atomic(const std::filesystem::path &path,
                       const std::string &bytes);

// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

}  // namespace elalign
