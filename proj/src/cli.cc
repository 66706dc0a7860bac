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

#include "elalign/cli.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elalign/alignpipe.h"
#include "elalign/error.h"
#include "elalign/evalkit.h"
#include "elalign/jointgmm.h"
#include "elalign/plot.h"
#include "elalign/seqio.h"

namespace elalign {

namespace fs = std::filesystem;

namespace {

struct AlignArgs {
  std::string mode = "mcep";
  std::string manifest, out_dir;
  int iterations = 3;
  int stack = 4;
  std::optional<Index> band;
  std::string lip_size = "64x64";
  std::uint64_t seed = 0;
  int mixtures = 32;
  bool include_c0 = false;
  bool force_iterations = false;
  bool dump_cost = false;
  double silence_db = 40.0;
  unsigned threads = 0;
};

struct TrainArgs {
  std::string manifest, paths, out;
  int mixtures = 32;
  std::uint64_t seed = 0;
  int max_iters = 100;
  bool include_c0 = false;
  double silence_db = 40.0;
};

struct ConvertArgs {
  std::string model, in, out;
};

struct EvalArgs {
  std::string manifest, paths, model, converted_dir;
  bool include_c0 = false;
  double silence_db = 40.0;
  unsigned threads = 0;
};

struct PlotArgs {
  std::string path, cost, src_lab, tgt_lab, out;
  int scale = 2;
  std::optional<double> period_ms;
};

ImageSize parse_lip_size(const std::string &text) {
  const auto x = text.find('x');
  int h = 0, w = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    size_t used = 0;
    h = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    w = std::stoi(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument(text);
  } catch (const std::exception &) {
    throw Error(ErrorCode::kInvalidArgument,
                "--lip-size expects HxW, got '" + text + "'");
  }
  if (h < 1 || w < 1) {
    throw Error(ErrorCode::kInvalidArgument, "--lip-size must be positive");
  }
  return {h, w};
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
// rethrown for the lowest failing index so reports do not depend on timing.
void parallel_for(size_t n, unsigned threads,
                  const std::function<void(size_t)> &fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread &t : pool) t.join();
  for (const std::exception_ptr &e : errors)
    if (e) std::rethrow_exception(e);
}

const ManifestEntry &require(const ManifestEntry &e, Role role) {
  if (!e.has(role)) {
    throw Error(ErrorCode::kMissingFile, "manifest entry " + e.id + " has no " +
                                             std::string(role_name(role)));
  }
  return e;
}

FeatureSequence load_mcep(const PairManifest &m, const ManifestEntry &e, Role role) {
  return read_feature_sequence(m.resolve(require(e, role), role),
                               FeatureKind::kMcep);
}

// Source frames whose statics feed the GMM: c0 optionally dropped, deltas
// appended.
Eigen::MatrixXd gmm_features(const FeatureSequence &seq, bool include_c0) {
  return alignment_features(to_matrix(seq), include_c0);
}

FeatureSequence convert_sequence(const GmmConverter<double> &conv,
                                 const FeatureSequence &in) {
  const Index d = in.dim();
  const Index dx = conv.source_dim();
  bool keep_c0;
  if (dx == 2 * d) {
    keep_c0 = false;
  } else if (dx == 2 * (d - 1)) {
    keep_c0 = true;
  } else {
    throw Error(ErrorCode::kDimensionMismatch,
                "model expects " + std::to_string(dx) +
                    "-dim static+delta input, sequence has " + std::to_string(d) +
                    " statics");
  }
  const Eigen::MatrixXd y =
      conv.convert_rows(gmm_features(in, !keep_c0)).leftCols(conv.target_dim() / 2);
  FeatureSequence out;
  out.kind = in.kind;
  out.frame_period_ms = in.frame_period_ms;
  out.frames.resize(in.num_frames(), (keep_c0 ? 1 : 0) + y.cols());
  if (keep_c0) out.frames.col(0) = in.frames.col(0);
  out.frames.rightCols(y.cols()) = y.cast<float>();
  return out;
}

std::string sidecar_json(const ManifestEntry &entry, const AlignArgs &args,
                         const AlignmentOutput &r, Index src_frames,
                         Index tgt_frames) {
  auto mask = [](const std::vector<Index> &kept, Index n) {
    std::vector<int> m(static_cast<size_t>(n), 0);
    for (Index i : kept) m[static_cast<size_t>(i)] = 1;
    return m;
  };
  nlohmann::ordered_json j;
  j["id"] = entry.id;
  j["modality"] = args.mode;
  j["iterations"] = args.iterations;
  j["stack_factor"] = args.stack;
  j["seed"] = args.seed;
  j["per_iteration_costs"] = r.per_iteration_costs;
  j["src_frames"] = src_frames;
  j["tgt_frames"] = tgt_frames;
  j["src_mask"] = mask(r.src_kept, src_frames);
  j["tgt_mask"] = mask(r.tgt_kept, tgt_frames);
  j["acoustic_path_length"] = r.acoustic_path.size();
  j["modality_path_length"] = r.modality_path.size();
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

int cmd_align(const AlignArgs &args, std::ostream &err) {
  AlignConfig config;
  if (args.mode == "mcep") {
    config.modality = Modality::kMcep;
  } else if (args.mode == "lip-raw") {
    config.modality = Modality::kLipRaw;
  } else {
    config.modality = Modality::kLipLandmark;
  }
  config.iterations = args.iterations;
  config.stack_factor = args.stack;
  config.band_radius = args.band;
  config.lip_size = parse_lip_size(args.lip_size);
  config.include_c0 = args.include_c0;
  config.force_iterations = args.force_iterations;
  config.keep_cost_matrix = args.dump_cost;
  config.silence_threshold_db = args.silence_db;
  config.gmm.seed = args.seed;
  config.gmm.mixtures = args.mixtures;
  config.validate();

  const PairManifest manifest = read_manifest(args.manifest);
  const fs::path out_dir = args.out_dir;
  fs::create_directories(out_dir);
  std::vector<std::vector<std::string>> warnings(manifest.entries.size());

  parallel_for(manifest.entries.size(), args.threads, [&](size_t k) {
    const ManifestEntry &e = manifest.entries[k];
    const FeatureSequence src = load_mcep(manifest, e, Role::kSrcMcep);
    const FeatureSequence tgt = load_mcep(manifest, e, Role::kTgtMcep);
    const double lip_fps = 1000.0 / (src.frame_period_ms * args.stack);
    AlignmentOutput r;
    switch (config.modality) {
      case Modality::kMcep:
        r = iterative_align(src, tgt, config);
        break;
      case Modality::kLipLandmark:
        r = lip_align(
            read_landmarks(manifest.resolve(require(e, Role::kSrcLmk), Role::kSrcLmk), lip_fps),
            read_landmarks(manifest.resolve(require(e, Role::kTgtLmk), Role::kTgtLmk), lip_fps),
            src, tgt, config);
        break;
      case Modality::kLipRaw:
        r = lip_align(
            read_lip_images(manifest.resolve(require(e, Role::kSrcLimg), Role::kSrcLimg), lip_fps),
            read_lip_images(manifest.resolve(require(e, Role::kTgtLimg), Role::kTgtLimg), lip_fps),
            src, tgt, config);
        break;
    }
    write_path(out_dir / (e.id + ".path.csv"), r.acoustic_path);
    write_path(out_dir / (e.id + ".modality.path.csv"), r.modality_path);
    write_file_atomic(out_dir / (e.id + ".align.json"),
                      sidecar_json(e, args, r, src.num_frames(), tgt.num_frames()));
    if (args.dump_cost && r.local_cost) {
      FeatureSequence cost;
      cost.frames = r.local_cost->cast<float>();
      cost.frame_period_ms = config.modality == Modality::kMcep
                                 ? src.frame_period_ms
                                 : src.frame_period_ms * args.stack;
      write_feature_sequence(out_dir / (e.id + ".cost.fseq"), cost);
    }
    for (const std::string &w : r.warnings) warnings[k].push_back(e.id + ": " + w);
  });
  for (const auto &list : warnings)
    for (const std::string &w : list) err << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_train(const TrainArgs &args) {
  const PairManifest manifest = read_manifest(args.manifest);
  std::vector<Eigen::MatrixXd> blocks(manifest.entries.size());
  parallel_for(manifest.entries.size(), 0, [&](size_t k) {
    const ManifestEntry &e = manifest.entries[k];
    const FeatureSequence src = load_mcep(manifest, e, Role::kSrcMcep);
    const FeatureSequence tgt = load_mcep(manifest, e, Role::kTgtMcep);
    const fs::path path_file = fs::path(args.paths) / (e.id + ".path.csv");
    const AlignmentPath path = read_path(path_file);
    if (path.src_length() > src.num_frames() ||
        path.tgt_length() > tgt.num_frames()) {
      throw Error(ErrorCode::kPathOutOfRange,
                  path_file.string() + ": path exceeds the mcep sequences of " + e.id);
    }
    // Only pairs where both frames are speech.
    std::vector<char> src_voiced(static_cast<size_t>(src.num_frames()), 0);
    std::vector<char> tgt_voiced(static_cast<size_t>(tgt.num_frames()), 0);
    for (Index i : remove_silence(src, args.silence_db).indices) src_voiced[i] = 1;
    for (Index i : remove_silence(tgt, args.silence_db).indices) tgt_voiced[i] = 1;
    std::vector<PathPoint> pts;
    for (const PathPoint &p : path.points())
      if (src_voiced[p.src] && tgt_voiced[p.tgt]) pts.push_back(p);
    const Eigen::MatrixXd xs = gmm_features(src, args.include_c0);
    const Eigen::MatrixXd ys = gmm_features(tgt, args.include_c0);
    Eigen::MatrixXd joint(static_cast<Index>(pts.size()), xs.cols() + ys.cols());
    for (size_t r = 0; r < pts.size(); ++r) {
      joint.row(static_cast<Index>(r)) << xs.row(pts[r].src), ys.row(pts[r].tgt);
    }
    blocks[k] = std::move(joint);
  });
  Index rows = 0;
  for (const auto &b : blocks) rows += b.rows();
  if (blocks.empty()) throw Error(ErrorCode::kTooFewSamples, "manifest is empty");
  Eigen::MatrixXd data(rows, blocks.front().cols());
  Index at = 0;
  for (const auto &b : blocks) {
    data.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  EmOptions opts;
  opts.mixtures = args.mixtures;
  opts.seed = args.seed;
  opts.max_iters = args.max_iters;
  const EmFit<double> fit = fit_em<double>(data, data.cols() / 2, opts);
  write_gmm(args.out, fit.model);
  return kExitOk;
}

int cmd_convert(const ConvertArgs &args) {
  const GmmConverter<double> conv(read_gmm(args.model));
  const FeatureSequence in = read_feature_sequence(args.in, FeatureKind::kMcep);
  write_feature_sequence(args.out, convert_sequence(conv, in));
  return kExitOk;
}

int cmd_eval_path(const EvalArgs &args, std::ostream &out) {
  const PairManifest manifest = read_manifest(args.manifest);
  std::vector<double> ratios(manifest.entries.size());
  parallel_for(manifest.entries.size(), args.threads, [&](size_t k) {
    const ManifestEntry &e = manifest.entries[k];
    const FeatureSequence src = load_mcep(manifest, e, Role::kSrcMcep);
    const FeatureSequence tgt = load_mcep(manifest, e, Role::kTgtMcep);
    const AlignmentPath path = read_path(fs::path(args.paths) / (e.id + ".path.csv"));
    const fs::path src_lab = manifest.resolve(require(e, Role::kSrcLab), Role::kSrcLab);
    const fs::path tgt_lab = manifest.resolve(require(e, Role::kTgtLab), Role::kTgtLab);
    try {
      ratios[k] = correct_ratio(path, read_boundaries(src_lab), read_boundaries(tgt_lab),
                                src.frame_period_ms, tgt.frame_period_ms);
    } catch (const Error &err) {
      throw Error(err.code(), e.id + " (" + src_lab.string() + " vs " +
                                  tgt_lab.string() + "): " + err.what());
    }
  });
  EvalReport report;
  for (size_t k = 0; k < ratios.size(); ++k)
    report.add(manifest.entries[k].id, "correct_ratio", ratios[k]);
  out << report.to_tsv();
  return kExitOk;
}

int cmd_eval_convert(const EvalArgs &args, std::ostream &out) {
  if (args.model.empty() == args.converted_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "eval convert needs exactly one of --model or --converted-dir");
  }
  const PairManifest manifest = read_manifest(args.manifest);
  std::optional<GmmConverter<double>> conv;
  if (!args.model.empty()) conv.emplace(read_gmm(args.model));
  struct Result {
    double mcd = 0.0;
    std::optional<double> f0rmse;
  };
  std::vector<Result> results(manifest.entries.size());
  parallel_for(manifest.entries.size(), args.threads, [&](size_t k) {
    const ManifestEntry &e = manifest.entries[k];
    const FeatureSequence tgt = load_mcep(manifest, e, Role::kTgtMcep);
    FeatureSequence converted;
    if (conv) {
      converted = convert_sequence(*conv, load_mcep(manifest, e, Role::kSrcMcep));
    } else {
      converted = read_feature_sequence(fs::path(args.converted_dir) / (e.id + ".fseq"),
                                        FeatureKind::kMcep);
    }
    const McdEvaluation m =
        eval_mcd_detailed(converted, tgt, args.include_c0, args.silence_db);
    results[k].mcd = m.mcd_db;
    if (!args.converted_dir.empty() && e.has(Role::kTgtF0)) {
      const fs::path f0_file = fs::path(args.converted_dir) / (e.id + ".f0.fseq");
      if (fs::exists(f0_file)) {
        results[k].f0rmse = eval_f0rmse(
            read_feature_sequence(f0_file, FeatureKind::kF0),
            read_feature_sequence(manifest.resolve(e, Role::kTgtF0), FeatureKind::kF0),
            m.path);
      }
    }
  });
  EvalReport report;
  for (size_t k = 0; k < results.size(); ++k) {
    report.add(manifest.entries[k].id, "mcd_db", results[k].mcd);
    if (results[k].f0rmse)
      report.add(manifest.entries[k].id, "f0rmse_hz", *results[k].f0rmse);
  }
  out << report.to_tsv();
  return kExitOk;
}

int cmd_plot(const PlotArgs &args) {
  const FeatureSequence cost = read_feature_sequence(args.cost);
  const AlignmentPath path = read_path(args.path);
  PlotOptions opts;
  opts.scale = args.scale;
  opts.src_period_ms = opts.tgt_period_ms = args.period_ms.value_or(cost.frame_period_ms);
  std::optional<BoundarySegmentation> src_lab, tgt_lab;
  if (!args.src_lab.empty()) {
    src_lab = read_boundaries(args.src_lab);
    opts.src_bounds = &*src_lab;
  }
  if (!args.tgt_lab.empty()) {
    tgt_lab = read_boundaries(args.tgt_lab);
    opts.tgt_bounds = &*tgt_lab;
  }
  const Eigen::MatrixXd c = cost.frames.cast<double>();
  try {
    write_file_atomic(args.out, render_alignment_ppm(c, path, opts));
  } catch (const Error &e) {
    throw Error(e.code(), args.path + " on " + args.cost + ": " + e.what());
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Alignment of electrolaryngeal and natural parallel speech",
               "elalign"};
  app.require_subcommand(1);

  AlignArgs align;
  CLI::App *align_cmd = app.add_subcommand("align", "Align every manifest pair");
  align_cmd->add_option("--mode", align.mode, "Alignment modality")
      ->check(CLI::IsMember({"mcep", "lip-raw", "lip-landmark"}))
      ->capture_default_str();
  align_cmd->add_option("--manifest", align.manifest, "Pair manifest TSV")
      ->required()->check(CLI::ExistingFile);
  align_cmd->add_option("--out-dir", align.out_dir, "Output directory")->required();
  align_cmd->add_option("--iterations", align.iterations, "DTW/GMM iterations")
      ->check(CLI::PositiveNumber)->capture_default_str();
  align_cmd->add_option("--stack", align.stack, "Acoustic frames per lip frame")
      ->check(CLI::PositiveNumber)->capture_default_str();
  align_cmd->add_option("--band", align.band, "Sakoe-Chiba radius in frames")
      ->check(CLI::NonNegativeNumber);
  align_cmd->add_option("--lip-size", align.lip_size, "Lip image size HxW")
      ->capture_default_str();
  align_cmd->add_option("--seed", align.seed, "GMM seed")->capture_default_str();
  align_cmd->add_option("--mixtures", align.mixtures, "GMM mixtures")
      ->check(CLI::PositiveNumber)->capture_default_str();
  align_cmd->add_flag("--include-c0", align.include_c0, "Use c0 in the mcep distance");
  align_cmd->add_flag("--force-iterations", align.force_iterations,
                      "Iterate lip modalities too");
  align_cmd->add_flag("--dump-cost", align.dump_cost, "Write <id>.cost.fseq");
  align_cmd->add_option("--silence-db", align.silence_db, "Silence threshold (dB)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  align_cmd->add_option("--threads", align.threads, "Worker threads (0 = all cores)");

  TrainArgs train;
  CLI::App *train_cmd = app.add_subcommand("train-gmm", "Fit a joint GMM on aligned pairs");
  train_cmd->add_option("--manifest", train.manifest)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--paths", train.paths, "Directory with <id>.path.csv")
      ->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--mixtures", train.mixtures)->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output LGMM file")->required();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--max-iters", train.max_iters)->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_flag("--include-c0", train.include_c0, "Model c0 as well");
  train_cmd->add_option("--silence-db", train.silence_db)->check(CLI::PositiveNumber)
      ->capture_default_str();

  ConvertArgs convert;
  CLI::App *convert_cmd = app.add_subcommand("convert", "Convert an mcep sequence");
  convert_cmd->add_option("--model", convert.model)->required()->check(CLI::ExistingFile);
  convert_cmd->add_option("--in", convert.in)->required()->check(CLI::ExistingFile);
  convert_cmd->add_option("--out", convert.out)->required();

  EvalArgs eval;
  CLI::App *eval_cmd = app.add_subcommand("eval", "Evaluation metrics as TSV");
  eval_cmd->require_subcommand(1);
  CLI::App *eval_path = eval_cmd->add_subcommand("path", "Correct ratio of stored paths");
  eval_path->add_option("--manifest", eval.manifest)->required()->check(CLI::ExistingFile);
  eval_path->add_option("--paths", eval.paths)->required()->check(CLI::ExistingDirectory);
  eval_path->add_option("--threads", eval.threads);
  CLI::App *eval_conv = eval_cmd->add_subcommand("convert", "MCD (and F0RMSE) of conversions");
  eval_conv->add_option("--manifest", eval.manifest)->required()->check(CLI::ExistingFile);
  auto *model_opt = eval_conv->add_option("--model", eval.model)->check(CLI::ExistingFile);
  auto *dir_opt = eval_conv->add_option("--converted-dir", eval.converted_dir,
                                        "Directory with <id>.fseq and <id>.f0.fseq")
                      ->check(CLI::ExistingDirectory);
  model_opt->excludes(dir_opt);
  eval_conv->add_flag("--include-c0", eval.include_c0);
  eval_conv->add_option("--silence-db", eval.silence_db)->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_conv->add_option("--threads", eval.threads);

  PlotArgs plot;
  CLI::App *plot_cmd = app.add_subcommand("plot", "Render an alignment matrix as PPM");
  plot_cmd->add_option("--path", plot.path)->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--cost", plot.cost)->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--src-lab", plot.src_lab)->check(CLI::ExistingFile);
  plot_cmd->add_option("--tgt-lab", plot.tgt_lab)->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot.out)->required();
  plot_cmd->add_option("--scale", plot.scale)->check(CLI::PositiveNumber)
      ->capture_default_str();
  plot_cmd->add_option("--period-ms", plot.period_ms,
                       "Frame period of the matrix (default: from the cost header)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*align_cmd) return cmd_align(align, err);
    if (*train_cmd) return cmd_train(train);
    if (*convert_cmd) return cmd_convert(convert);
    if (*eval_path) return cmd_eval_path(eval, out);
    if (*eval_conv) return cmd_eval_convert(eval, out);
    if (*plot_cmd) return cmd_plot(plot);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitDataError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace elalign
