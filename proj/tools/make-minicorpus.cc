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

// Writes the synthetic three-utterance corpus used by the end-to-end tests.
//
//   make-minicorpus OUT_DIR

#include <filesystem>
#include <iostream>
#include <string>

#include "elalign/error.h"
#include "elalign/seqio.h"
#include "elalign/synth.h"

namespace fs = std::filesystem;
using namespace elalign;

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: make-minicorpus OUT_DIR\n";
    return 2;
  }
  const fs::path dir = argv[1];
  try {
    fs::create_directories(dir);
    PairManifest manifest;
    manifest.base_dir = dir;
    for (int u = 1; u <= 3; ++u) {
      SynthOptions opts;
      opts.seed = static_cast<std::uint64_t>(u);
      opts.syllables = 8;
      const SynthPair pair = make_parallel_pair(opts);
      const std::string id = "utt00" + std::to_string(u);
      ManifestEntry entry;
      entry.id = id;
      auto put = [&](Role role, const std::string &suffix) {
        entry.files[role] = id + suffix;
        return dir / (id + suffix);
      };
      write_feature_sequence(put(Role::kSrcMcep, ".el.mcep.fseq"), pair.src_mcep);
      write_feature_sequence(put(Role::kTgtMcep, ".nl.mcep.fseq"), pair.tgt_mcep);
      write_feature_sequence(put(Role::kSrcF0, ".el.f0.fseq"), pair.src_f0);
      write_feature_sequence(put(Role::kTgtF0, ".nl.f0.fseq"), pair.tgt_f0);
      write_landmarks(put(Role::kSrcLmk, ".el.lmk.csv"), pair.src_lmk);
      write_landmarks(put(Role::kTgtLmk, ".nl.lmk.csv"), pair.tgt_lmk);
      write_lip_images(put(Role::kSrcLimg, ".el.limg"), pair.src_limg);
      write_lip_images(put(Role::kTgtLimg, ".nl.limg"), pair.tgt_limg);
      write_boundaries(put(Role::kSrcLab, ".el.lab"), pair.src_lab);
      write_boundaries(put(Role::kTgtLab, ".nl.lab"), pair.tgt_lab);
      manifest.entries.push_back(std::move(entry));
    }
    write_manifest(dir / "manifest.tsv", manifest);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
