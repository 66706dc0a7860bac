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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elalign/alignpipe.h"
#include "elalign/dtw.h"
#include "elalign/evalkit.h"
#include "elalign/framedist.h"
#include "elalign/jointgmm.h"
#include "elalign/synth.h"
#include "test-util.h"

namespace elalign {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *format, auto... values) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, values...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool monotone_connected(const AlignmentPath &p, Index ts, Index tt) {
  const auto &pts = p.points();
  if (pts.front() != PathPoint{0, 0} || pts.back() != PathPoint{ts - 1, tt - 1}) return false;
  for (size_t k = 1; k < pts.size(); ++k) {
    const Index di = pts[k].src - pts[k - 1].src, dj = pts[k].tgt - pts[k - 1].tgt;
    if (di < 0 || dj < 0 || di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

Outcome dtw_matches_brute_force() {
  std::mt19937_64 gen(20261016);
  std::uniform_int_distribution<Index> len(1, 10);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  const auto t0 = Clock::now();
  int mismatches = 0, bad_paths = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index ts = len(gen), tt = len(gen);
    Eigen::MatrixXd c(ts, tt);
    for (Index i = 0; i < ts; ++i)
      for (Index j = 0; j < tt; ++j) c(i, j) = cost(gen);
    auto at = [&](Index i, Index j) { return c(i, j); };
    const DtwResult fast = dtw_align(ts, tt, at);
    const DtwResult slow = brute_force_align(ts, tt, at);
    if (fast.total_cost != slow.total_cost) ++mismatches;
    if (!monotone_connected(fast.path, ts, tt)) ++bad_paths;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && bad_paths == 0 && secs < 10.0,
          fmt("500 instances, %d cost mismatches, %d invalid paths, %.2f s", mismatches,
              bad_paths, secs)};
}

Outcome mcd_unit_difference() {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(25), b = a;
  b(7) = 1.0;
  const double got = mcd_frame(a, b);
  return {std::abs(got - 6.141851) <= 1e-6, fmt("%.9f dB", got)};
}

Outcome landmark_metric() {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> pt(0.0, 30.0), shift(0.0, 500.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::MatrixX2d a(kNumLipLandmarks, 2), b(kNumLipLandmarks, 2);
    for (Index r = 0; r < kNumLipLandmarks; ++r) {
      a.row(r) << pt(gen), pt(gen);
      b.row(r) << pt(gen), pt(gen);
    }
    const Eigen::RowVector2d ta(shift(gen), shift(gen)), tb(shift(gen), shift(gen));
    const double base = landmark_distance(a, b);
    const double moved = landmark_distance(Eigen::MatrixX2d(a.rowwise() + ta),
                                           Eigen::MatrixX2d(b.rowwise() + tb));
    worst = std::max(worst, std::abs(moved - base));
  }
  Eigen::MatrixX2d unit(kNumLipLandmarks, 2);
  for (Index r = 0; r < kNumLipLandmarks; ++r) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(r) / kNumLipLandmarks;
    unit.row(r) << std::cos(th), std::sin(th);
  }
  const double circle = landmark_distance(unit, Eigen::MatrixX2d(2.0 * unit));
  return {worst <= 1e-9 && std::abs(circle - 20.0) <= 1e-9,
          fmt("max translation drift %.3g over 1000 sets, circle case %.12f", worst, circle)};
}

Eigen::MatrixXd mixture_data(std::mt19937_64 *gen, Index n, Index d, int clusters) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Eigen::VectorXd> centers;
  std::vector<Eigen::MatrixXd> mixing;
  for (int c = 0; c < clusters; ++c) {
    Eigen::VectorXd mu(d);
    Eigen::MatrixXd a(d, d);
    for (Index k = 0; k < d; ++k) mu(k) = 4.0 * z(*gen);
    for (Index k = 0; k < d * d; ++k) a(k) = 0.6 * z(*gen);
    a += Eigen::MatrixXd::Identity(d, d) * 0.5;
    centers.push_back(mu);
    mixing.push_back(a);
  }
  Eigen::MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<size_t>(i % clusters);
    Eigen::VectorXd e(d);
    for (Index k = 0; k < d; ++k) e(k) = z(*gen);
    x.row(i) = (centers[c] + mixing[c] * e).transpose();
  }
  return x;
}

Outcome em_monotone_and_mle() {
  std::mt19937_64 gen(11);
  constexpr int kMixtures[] = {1, 2, 4};
  double worst_step = std::numeric_limits<double>::infinity();
  double mle_err = 0.0;
  int total_iters = 0;
  for (int ds = 0; ds < 50; ++ds) {
    const Eigen::MatrixXd x = mixture_data(&gen, 500, 4, 1 + ds % 4);
    for (int m : kMixtures) {
      EmOptions o;
      o.mixtures = m;
      o.seed = static_cast<std::uint64_t>(ds);
      o.max_iters = 60;
      o.tol = -std::numeric_limits<double>::infinity();
      const EmFit<double> fit = fit_em<double>(x, 2, o);
      total_iters += fit.iterations;
      for (size_t k = 1; k < fit.log_likelihood.size(); ++k)
        worst_step =
            std::min(worst_step, fit.log_likelihood[k] - fit.log_likelihood[k - 1]);
      if (m == 1) {
        const Eigen::RowVectorXd mean = x.colwise().mean();
        const Eigen::MatrixXd centered = x.rowwise() - mean;
        const Eigen::MatrixXd cov = centered.transpose() * centered / 500.0;
        mle_err = std::max(mle_err, (fit.model.means.row(0) - mean).cwiseAbs().maxCoeff());
        mle_err = std::max(mle_err, (fit.model.covariances[0] - cov).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst_step >= -1e-8 && mle_err <= 1e-9,
          fmt("150 fits, %d iterations, smallest step %.3g, single-component error %.3g",
              total_iters, worst_step, mle_err)};
}

Outcome single_component_is_regression() {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> z(0.0, 1.0);
  constexpr Index n = 10000, dx = 3, dy = 2;
  Eigen::MatrixXd mix(dx, dx), coef(dy, dx);
  for (Index k = 0; k < dx * dx; ++k) mix(k) = z(gen);
  for (Index k = 0; k < dy * dx; ++k) coef(k) = z(gen);
  const Eigen::Vector3d x_mean(1.0, -2.0, 0.5);
  const Eigen::Vector2d y_off(3.0, -1.0);
  Eigen::MatrixXd joint(n, dx + dy);
  for (Index i = 0; i < n; ++i) {
    Eigen::Vector3d e(z(gen), z(gen), z(gen));
    const Eigen::Vector3d x = x_mean + mix * e;
    const Eigen::Vector2d y = coef * x + y_off + 0.3 * Eigen::Vector2d(z(gen), z(gen));
    joint.row(i) << x.transpose(), y.transpose();
  }
  EmOptions o;
  o.mixtures = 1;
  const JointGmmd model = fit_em<double>(joint, dx, o).model;

  Eigen::MatrixXd design(n, dx + 1);
  design << Eigen::VectorXd::Ones(n), joint.leftCols(dx);
  const Eigen::MatrixXd beta = design.colPivHouseholderQr().solve(joint.rightCols(dy));
  const GmmConverter<double> conv(model);
  const Eigen::MatrixXd ols = design * beta;
  const Eigen::MatrixXd got = conv.convert_rows(joint.leftCols(dx));
  double worst = 0.0;
  for (Index i = 0; i < n; ++i)
    worst = std::max(worst, (got.row(i) - ols.row(i)).norm() / ols.row(i).norm());
  const Eigen::VectorXd single = convert_frame(model, Eigen::VectorXd(joint.row(0).head(dx)));
  worst = std::max(worst, (single.transpose() - ols.row(0)).norm() / ols.row(0).norm());
  return {worst <= 1e-6, fmt("max relative deviation %.3g over %d frames", worst, int(n))};
}

Outcome known_warp_recovery() {
  double lowest = 1.0, sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const WarpedPair w = make_warped_pair(seed, 200, 12, 20.0, 8);
    const DtwResult r = dtw_align_rows(w.src, w.tgt, [](const auto &a, const auto &b) {
      return (a - b).norm();
    });
    const double cr = correct_ratio(r.path, w.src_lab, w.tgt_lab, w.frame_period_ms,
                                    w.frame_period_ms);
    lowest = std::min(lowest, cr);
    sum += cr;
  }
  return {lowest >= 0.95, fmt("20 trials, worst %.4f, mean %.4f", lowest, sum / 20.0)};
}

double acoustic_ratio(const AlignmentOutput &out, const SynthPair &p) {
  return correct_ratio(out.acoustic_path, p.src_lab, p.tgt_lab, p.src_mcep.frame_period_ms,
                       p.tgt_mcep.frame_period_ms);
}

Outcome clean_modality_beats_corrupted() {
  double mcep = 0.0, lmk = 0.0, raw = 0.0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    SynthOptions o;
    o.seed = seed;
    o.syllables = 8;
    const SynthPair p = make_parallel_pair(o);
    AlignConfig c;
    c.gmm.seed = seed;
    c.gmm.mixtures = 4;
    mcep += acoustic_ratio(iterative_align(p.src_mcep, p.tgt_mcep, c), p);
    c.modality = Modality::kLipLandmark;
    lmk += acoustic_ratio(lip_align(p.src_lmk, p.tgt_lmk, p.src_mcep, p.tgt_mcep, c), p);
    c.modality = Modality::kLipRaw;
    raw += acoustic_ratio(lip_align(p.src_limg, p.tgt_limg, p.src_mcep, p.tgt_mcep, c), p);
  }
  mcep /= 20.0;
  lmk /= 20.0;
  raw /= 20.0;
  return {lmk > mcep && raw > mcep,
          fmt("mean correct ratio over 20 trials: acoustic %.4f, landmarks %.4f, pixels %.4f",
              mcep, lmk, raw)};
}

Outcome lip_path_idempotent() {
  int differ = 0, runs = 0;
  for (std::uint64_t seed = 200; seed < 205; ++seed) {
    SynthOptions o;
    o.seed = seed;
    o.syllables = 5;
    const SynthPair p = make_parallel_pair(o);
    for (Modality m : {Modality::kLipLandmark, Modality::kLipRaw}) {
      AlignConfig c;
      c.modality = m;
      c.gmm.mixtures = 2;
      c.iterations = 1;
      auto run = [&](const AlignConfig &cfg) {
        return m == Modality::kLipRaw
                   ? lip_align(p.src_limg, p.tgt_limg, p.src_mcep, p.tgt_mcep, cfg)
                   : lip_align(p.src_lmk, p.tgt_lmk, p.src_mcep, p.tgt_mcep, cfg);
      };
      const AlignmentOutput once = run(c);
      c.iterations = 3;
      c.force_iterations = true;
      const AlignmentOutput thrice = run(c);
      ++runs;
      if (!(once.modality_path == thrice.modality_path) ||
          !(once.acoustic_path == thrice.acoustic_path) ||
          thrice.per_iteration_costs.size() != 3)
        ++differ;
    }
  }
  return {differ == 0, fmt("%d of %d pairs changed between 1 and 3 iterations", differ, runs)};
}

int shell(const std::string &cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quote(const fs::path &p) { return "'" + p.string() + "'"; }

// Runs the full command-line pipeline into `dir`; returns the first failing step.
std::string pipeline(const fs::path &dir) {
  const fs::path corpus = fs::path(ELALIGN_DATA_DIR) / "minicorpus";
  const std::string cli = quote(ELALIGN_CLI_PATH);
  const std::string manifest = quote(corpus / "manifest.tsv");
  const fs::path paths = dir / "paths", conv = dir / "converted";
  fs::create_directories(conv);
  std::vector<std::string> steps = {
      cli + " align --mode lip-landmark --manifest " + manifest + " --out-dir " +
          quote(paths) + " --seed 5 --dump-cost",
      cli + " align --mode mcep --manifest " + manifest + " --out-dir " +
          quote(dir / "mcep-paths") + " --seed 5 --mixtures 4",
      cli + " train-gmm --manifest " + manifest + " --paths " + quote(paths) +
          " --seed 5 --out " + quote(dir / "model.lgmm"),
      cli + " eval path --manifest " + manifest + " --paths " + quote(paths) + " > " +
          quote(dir / "eval-path.tsv"),
      cli + " eval convert --manifest " + manifest + " --model " + quote(dir / "model.lgmm") +
          " > " + quote(dir / "eval-convert.tsv")};
  for (const char *id : {"utt001", "utt002", "utt003"}) {
    steps.push_back(cli + " convert --model " + quote(dir / "model.lgmm") + " --in " +
                    quote(corpus / (std::string(id) + ".el.mcep.fseq")) + " --out " +
                    quote(conv / (std::string(id) + ".fseq")));
  }
  for (const std::string &s : steps) {
    const int code = shell(s + " 2>> " + quote(dir / "stderr.txt"));
    if (code != 0) return fmt("exit %d from: %s", code, s.c_str());
  }
  return "";
}

std::vector<std::string> relative_files(const fs::path &root) {
  std::vector<std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
  std::sort(out.begin(), out.end());
  return out;
}

Outcome end_to_end() {
  testing::TempDir a, b;
  const auto t0 = Clock::now();
  const std::string fail_a = pipeline(a.path());
  const double secs = seconds_since(t0);
  if (!fail_a.empty()) return {false, "first run: " + fail_a};
  const std::string fail_b = pipeline(b.path());
  if (!fail_b.empty()) return {false, "second run: " + fail_b};
  const std::vector<std::string> files = relative_files(a.path());
  if (files != relative_files(b.path())) return {false, "runs produced different file sets"};
  int differing = 0;
  std::string first_diff;
  for (const std::string &f : files) {
    if (testing::read_bytes(a / f) != testing::read_bytes(b / f)) {
      if (differing++ == 0) first_diff = f;
    }
  }
  std::string detail = fmt("%zu files compared, %d differ, first run %.2f s", files.size(),
                           differing, secs);
  if (differing) detail += " (" + first_diff + ")";
  return {differing == 0 && secs < 60.0, detail};
}

}  // namespace
}  // namespace elalign

int main() {
  using namespace elalign;
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"dtw-brute-force-equivalence", dtw_matches_brute_force},
      {"mcd-unit-anchor", mcd_unit_difference},
      {"landmark-metric", landmark_metric},
      {"em-monotone-and-mle", em_monotone_and_mle},
      {"single-component-regression", single_component_is_regression},
      {"known-warp-recovery", known_warp_recovery},
      {"clean-modality-beats-corrupted", clean_modality_beats_corrupted},
      {"lip-path-idempotence", lip_path_idempotent},
      {"end-to-end-pipeline", end_to_end},
  };
  int failed = 0;
  for (const auto &[name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
