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

#include "elalign/synth.h"

#include <gtest/gtest.h>

#include "elalign/alignpipe.h"
#include "elalign/dtw.h"
#include "elalign/evalkit.h"
#include "test-util.h"

namespace elalign {
namespace {

TEST(ParallelPair, ConsistentShapes) {
  SynthOptions o;
  o.seed = 4;
  SynthPair p = make_parallel_pair(o);
  EXPECT_EQ(p.src_mcep.dim(), 25);
  EXPECT_EQ(p.src_mcep.kind, FeatureKind::kMcep);
  EXPECT_EQ(p.src_f0.num_frames(), p.src_mcep.num_frames());
  EXPECT_EQ(p.tgt_f0.num_frames(), p.tgt_mcep.num_frames());
  EXPECT_EQ(p.src_lmk.size(), p.src_mcep.num_frames() / 4);
  EXPECT_EQ(p.tgt_lmk.size(), p.tgt_mcep.num_frames() / 4);
  EXPECT_EQ(p.src_limg.size(), p.src_lmk.size());
  EXPECT_EQ(p.src_limg.height, 24);
  EXPECT_EQ(p.src_limg.width, 32);
  EXPECT_EQ(p.src_lmk.video_fps, 50.0);
  EXPECT_EQ(p.src_lab.size(), 10);
  EXPECT_EQ(p.tgt_lab.size(), 10);
  EXPECT_EQ(p.src_lab.segments[3].label, p.tgt_lab.segments[3].label);
}

TEST(ParallelPair, HasSilenceAndUnvoicedEdges) {
  SynthPair p = make_parallel_pair({});
  SilenceRemoval s = remove_silence(p.tgt_mcep);
  EXPECT_LT(static_cast<Index>(s.indices.size()), p.tgt_mcep.num_frames());
  EXPECT_GT(static_cast<Index>(s.indices.size()), p.tgt_mcep.num_frames() / 2);
  EXPECT_EQ(p.src_f0.frames(0, 0), 0.0f);
  EXPECT_GT(p.src_f0.frames.maxCoeff(), 0.0f);
}

TEST(ParallelPair, Deterministic) {
  SynthOptions o;
  o.seed = 7;
  SynthPair a = make_parallel_pair(o), b = make_parallel_pair(o);
  EXPECT_EQ(a.src_mcep.frames, b.src_mcep.frames);
  EXPECT_EQ(a.tgt_limg.pixels, b.tgt_limg.pixels);
  o.seed = 8;
  SynthPair c = make_parallel_pair(o);
  EXPECT_NE(a.src_mcep.num_frames() * 1000 + a.tgt_mcep.num_frames(),
            c.src_mcep.num_frames() * 1000 + c.tgt_mcep.num_frames());
}

TEST(ParallelPair, DistortionOnlyTouchesSourceAcoustics) {
  SynthOptions o;
  o.seed = 3;
  SynthPair clean = make_parallel_pair(o);
  o.el_distortion = 2.0;
  SynthPair noisy = make_parallel_pair(o);
  EXPECT_EQ(clean.tgt_mcep.frames, noisy.tgt_mcep.frames);
  EXPECT_NE(clean.src_mcep.frames, noisy.src_mcep.frames);
  EXPECT_EQ(clean.src_lab.segments.size(), noisy.src_lab.segments.size());
}

TEST(WarpedPair, SegmentsLineUp) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    WarpedPair w = make_warped_pair(seed, 200, 12, 20.0, 8);
    EXPECT_EQ(w.src.rows(), 200);
    EXPECT_EQ(w.src_lab.size(), 8);
    EXPECT_EQ(w.tgt_lab.size(), 8);
    EXPECT_EQ(w.tgt_lab.segments.front().start_ms, 0.0);
    EXPECT_EQ(w.tgt_lab.segments.back().end_ms, w.tgt.rows() * w.frame_period_ms);
    BoundarySegmentation copy = w.tgt_lab;
    EXPECT_NO_THROW(validate_segmentation(&copy));
  }
}

TEST(WarpedPair, HighSnrDtwFollowsTheWarp) {
  WarpedPair w = make_warped_pair(3, 150, 10, 60.0, 6);
  DtwResult r = dtw_align_rows(w.src, w.tgt, [](const auto &a, const auto &b) {
    return (a - b).norm();
  });
  EXPECT_GE(correct_ratio(r.path, w.src_lab, w.tgt_lab, 5.0, 5.0), 0.95);
}

}  // namespace
}  // namespace elalign
