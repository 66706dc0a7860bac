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

// Synthetic parallel utterances for fixtures and simulations.
//
// Each pair shares a syllable sequence. Every syllable has a latent
// articulation (mouth opening, width, rounding) and a latent spectral
// target; the two speakers realize them with independent durations. The
// target side is "natural" speech, the source side is an electrolaryngeal
// rendition whose mceps go through a different speaker mapping plus a
// spectral tilt and a structured buzz, while its lips follow the shared
// articulation.

#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "elalign/seqio.h"

namespace elalign {

struct SynthOptions {
  std::uint64_t seed = 1;
  int syllables = 10;
  int mcep_dim = 25;
  double frame_period_ms = 5.0;
  int stack_factor = 4;  // acoustic frames per lip frame
  // Scale of the source-side corruption (tilt, buzz, noise); 0 leaves the
  // source as a plain speaker-mapped copy of the content.
  double el_distortion = 1.0;
  Index lip_height = 24;
  Index lip_width = 32;
};

struct SynthPair {
  FeatureSequence src_mcep, tgt_mcep;
  FeatureSequence src_f0, tgt_f0;
  LipLandmarkSequence src_lmk, tgt_lmk;
  LipImageSequence src_limg, tgt_limg;
  BoundarySegmentation src_lab, tgt_lab;
};

SynthPair make_parallel_pair(const SynthOptions &options);

struct WarpedPair {
  Eigen::MatrixXd src;
  Eigen::MatrixXd tgt;
  // Ground-truth segments: target segment k holds the frames whose warped
  // source position falls in source segment k.
  BoundarySegmentation src_lab, tgt_lab;
  double frame_period_ms = 5.0;
};

// Random smooth sequence of `length` frames, resampled by a random monotone
// warp to a new length and corrupted with white noise at `snr_db`.
WarpedPair make_warped_pair(std::uint64_t seed, Index length, Index dim,
                            double snr_db, Index segments);

}  // namespace elalign
