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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace elalign {

namespace {

constexpr double kPi = std::numbers::pi;

// splitmix64 plus Box-Muller; platform-independent output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed * 0x2545f4914f6cdd1dULL + 1) {}
  double uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  Eigen::VectorXd normal_vector(Index n) {
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  std::uint64_t state_;
};

const std::array<const char *, 20> kSyllableLabels = {
    "今", "天", "氣", "很", "好", "我", "們", "去", "公", "園",
    "散", "步", "吧", "明", "早", "再", "見", "大", "家", "來"};

struct Timeline {
  std::vector<double> start_ms, end_ms;
  Index frames = 0;
};

Timeline make_timeline(Rng *rng, const std::vector<double> &dur_ms,
                       double period_ms) {
  Timeline tl;
  double t = rng->uniform(150.0, 300.0);
  for (double d : dur_ms) {
    tl.start_ms.push_back(t);
    t += d;
    tl.end_ms.push_back(t);
  }
  t += rng->uniform(150.0, 300.0);
  tl.frames = static_cast<Index>(std::floor(t / period_ms));
  return tl;
}

// Moving average over +-radius frames with replicated edges.
Eigen::MatrixXd smooth_rows(const Eigen::MatrixXd &m, Index radius) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Index t = 0; t < m.rows(); ++t) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m.cols());
    for (Index k = -radius; k <= radius; ++k)
      acc += m.row(std::clamp<Index>(t + k, 0, m.rows() - 1));
    out.row(t) = acc / static_cast<double>(2 * radius + 1);
  }
  return out;
}

// Per-frame latent trajectories for one speaker. Columns: energy, 3
// articulation parameters, then the spectral content.
Eigen::MatrixXd latent_track(const Timeline &tl, double period_ms,
                             const std::vector<Eigen::Vector3d> &artic,
                             const std::vector<Eigen::VectorXd> &spectra) {
  const Index dim = spectra.front().size();
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(tl.frames, 4 + dim);
  for (Index t = 0; t < tl.frames; ++t) {
    const double c = (static_cast<double>(t) + 0.5) * period_ms;
    for (size_t k = 0; k < tl.start_ms.size(); ++k) {
      if (c >= tl.start_ms[k] && c < tl.end_ms[k]) {
        raw(t, 0) = 1.0;
        raw.row(t).segment(1, 3) = artic[k].transpose();
        raw.row(t).tail(dim) = spectra[k].transpose();
        break;
      }
    }
  }
  return smooth_rows(raw, 4);
}

LandmarkPoints mouth_shape(const Eigen::Vector3d &artic, double scale,
                           const Eigen::Vector2d &center) {
  const double opening = artic(0), width = artic(1), rounding = artic(2);
  const double outer_w = scale * 30.0 * (1.0 + 0.15 * width - 0.2 * rounding);
  const double outer_h = scale * (9.0 + 11.0 * opening + 3.0 * rounding);
  const double inner_w = outer_w * (0.72 - 0.1 * rounding);
  const double inner_h = scale * (0.8 + 10.0 * opening);
  LandmarkPoints p(kNumLipLandmarks, 2);
  for (int i = 0; i < 12; ++i) {
    const double th = 2.0 * kPi * i / 12.0;
    p(i, 0) = center(0) + outer_w * std::cos(th);
    p(i, 1) = center(1) + outer_h * std::sin(th);
  }
  for (int i = 0; i < 8; ++i) {
    const double th = 2.0 * kPi * i / 8.0;
    p(12 + i, 0) = center(0) + inner_w * std::cos(th);
    p(12 + i, 1) = center(1) + inner_h * std::sin(th);
  }
  return p;
}

bool inside(const LandmarkPoints &p, Index first, Index count, double x,
            double y) {
  bool in = false;
  for (Index a = 0, b = count - 1; a < count; b = a++) {
    const double xa = p(first + a, 0), ya = p(first + a, 1);
    const double xb = p(first + b, 0), yb = p(first + b, 1);
    if ((ya > y) != (yb > y) && x < (xb - xa) * (y - ya) / (yb - ya) + xa)
      in = !in;
  }
  return in;
}

// Crops the bounding box of the lip points (10% margin) into a fixed-size
// grayscale image: skin, lips, mouth cavity.
GrayImage render_lips(const LandmarkPoints &p, Index h, Index w, Rng *rng) {
  const double x0 = p.col(0).minCoeff(), x1 = p.col(0).maxCoeff();
  const double y0 = p.col(1).minCoeff(), y1 = p.col(1).maxCoeff();
  const double mx = 0.1 * (x1 - x0), my = 0.1 * (y1 - y0);
  GrayImage img(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double x = x0 - mx + (c + 0.5) / w * (x1 - x0 + 2 * mx);
      const double y = y0 - my + (r + 0.5) / h * (y1 - y0 + 2 * my);
      double v = 180.0;
      if (inside(p, 12, 8, x, y)) {
        v = 40.0;
      } else if (inside(p, 0, 12, x, y)) {
        v = 110.0;
      }
      v += 3.0 * rng->normal();
      img(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

struct SpeakerRender {
  double mouth_scale;
  Eigen::Vector2d head;
  double head_drift;
};

void render_lip_streams(const Eigen::MatrixXd &latent, const SynthOptions &o,
                        const SpeakerRender &spk, Rng *rng,
                        LipLandmarkSequence *lmk, LipImageSequence *limg) {
  const double lip_period_ms = o.frame_period_ms * o.stack_factor;
  const Index frames = latent.rows() / o.stack_factor;
  lmk->video_fps = 1000.0 / lip_period_ms;
  limg->video_fps = lmk->video_fps;
  Eigen::Vector2d head = spk.head;
  for (Index n = 0; n < frames; ++n) {
    const Index a = std::min<Index>(n * o.stack_factor + o.stack_factor / 2,
                                    latent.rows() - 1);
    head += spk.head_drift * Eigen::Vector2d(rng->normal(), rng->normal());
    LandmarkPoints pts =
        mouth_shape(latent.row(a).segment(1, 3).transpose(), spk.mouth_scale, head);
    for (Index i = 0; i < pts.rows(); ++i) {
      pts(i, 0) += 0.3 * rng->normal();
      pts(i, 1) += 0.3 * rng->normal();
    }
    LandmarkFrame f;
    f.frame = n;
    f.t_ms = static_cast<double>(n) * lip_period_ms;
    f.points = pts;
    limg->append(render_lips(pts, o.lip_height, o.lip_width, rng));
    lmk->frames.push_back(std::move(f));
  }
}

BoundarySegmentation labels_of(const Timeline &tl) {
  BoundarySegmentation seg;
  for (size_t k = 0; k < tl.start_ms.size(); ++k)
    seg.segments.push_back({tl.start_ms[k], tl.end_ms[k],
                            kSyllableLabels[k % kSyllableLabels.size()]});
  return seg;
}

FeatureSequence as_sequence(const Eigen::MatrixXd &m, double period,
                            FeatureKind kind) {
  FeatureSequence s;
  s.frames = m.cast<float>();
  s.frame_period_ms = period;
  s.kind = kind;
  return s;
}

}  // namespace

SynthPair make_parallel_pair(const SynthOptions &o) {
  Rng rng(o.seed);
  const Index d = o.mcep_dim;
  const Index spec_dim = d - 1;
  const int k_count = o.syllables;

  std::vector<Eigen::Vector3d> artic;
  std::vector<Eigen::VectorXd> spectra;
  for (int k = 0; k < k_count; ++k) {
    artic.emplace_back(rng.uniform(0.1, 1.0), rng.uniform(-1.0, 1.0),
                       rng.uniform(-1.0, 1.0));
    spectra.push_back(rng.normal_vector(spec_dim));
  }
  std::vector<double> tgt_dur, src_dur;
  for (int k = 0; k < k_count; ++k) {
    tgt_dur.push_back(rng.uniform(160.0, 320.0));
    src_dur.push_back(tgt_dur.back() * rng.uniform(0.8, 1.5));
  }
  const Timeline tgt_tl = make_timeline(&rng, tgt_dur, o.frame_period_ms);
  const Timeline src_tl = make_timeline(&rng, src_dur, o.frame_period_ms);
  const Eigen::MatrixXd tgt_lat =
      latent_track(tgt_tl, o.frame_period_ms, artic, spectra);
  const Eigen::MatrixXd src_lat =
      latent_track(src_tl, o.frame_period_ms, artic, spectra);

  Eigen::VectorXd decay(spec_dim);
  for (Index i = 0; i < spec_dim; ++i) decay(i) = 1.0 / (1.0 + 0.15 * i);

  // Source speaker mapping, tilt and buzz.
  Eigen::MatrixXd mix = 0.6 * Eigen::MatrixXd::Identity(spec_dim, spec_dim);
  for (Index r = 0; r < spec_dim; ++r)
    for (Index c = 0; c < spec_dim; ++c)
      mix(r, c) += 0.5 * rng.normal() / std::sqrt(static_cast<double>(spec_dim));
  Eigen::VectorXd tilt(spec_dim), buzz(spec_dim), hum(spec_dim);
  for (Index i = 0; i < spec_dim; ++i) {
    tilt(i) = 3.6 * (1.0 - 2.0 * i / static_cast<double>(spec_dim - 1));
    buzz(i) = 4.5 * rng.normal() * decay(i);
    hum(i) = 3.0 * rng.normal() * decay(i);
  }
  const double hum_period = rng.uniform(15.0, 40.0);

  Eigen::MatrixXd tgt_mcep(tgt_lat.rows(), d), tgt_f0(tgt_lat.rows(), 1);
  for (Index t = 0; t < tgt_lat.rows(); ++t) {
    const double e = tgt_lat(t, 0);
    tgt_mcep(t, 0) = -8.0 + 10.0 * e + 0.05 * rng.normal();
    tgt_mcep.row(t).tail(spec_dim) =
        (decay.array() * tgt_lat.row(t).tail(spec_dim).transpose().array()).transpose();
    for (Index i = 1; i < d; ++i) tgt_mcep(t, i) += 0.05 * rng.normal();
    tgt_f0(t, 0) = e > 0.5 ? 120.0 + 25.0 * std::sin(0.05 * static_cast<double>(t)) +
                                 tgt_lat(t, 1) * 10.0
                           : 0.0;
  }

  const double g = o.el_distortion;
  Eigen::MatrixXd src_mcep(src_lat.rows(), d), src_f0(src_lat.rows(), 1);
  for (Index t = 0; t < src_lat.rows(); ++t) {
    const double e = src_lat(t, 0);
    src_mcep(t, 0) = -8.0 + 10.0 * e + 0.05 * rng.normal();
    Eigen::VectorXd content = mix * src_lat.row(t).tail(spec_dim).transpose();
    const double wobble = std::sin(2.0 * kPi * static_cast<double>(t) / hum_period);
    Eigen::VectorXd envelope = decay.cwiseProduct(content) +
                           g * e * (tilt + buzz + wobble * hum) +
                           (0.05 + 1.8 * g) * decay.cwiseProduct(rng.normal_vector(spec_dim));
    src_mcep.row(t).tail(spec_dim) = envelope.transpose();
    src_f0(t, 0) = e > 0.5 ? 100.0 : 0.0;
  }

  SynthPair pair;
  pair.tgt_mcep = as_sequence(tgt_mcep, o.frame_period_ms, FeatureKind::kMcep);
  pair.src_mcep = as_sequence(src_mcep, o.frame_period_ms, FeatureKind::kMcep);
  pair.tgt_f0 = as_sequence(tgt_f0, o.frame_period_ms, FeatureKind::kF0);
  pair.src_f0 = as_sequence(src_f0, o.frame_period_ms, FeatureKind::kF0);
  pair.tgt_lab = labels_of(tgt_tl);
  pair.src_lab = labels_of(src_tl);

  SpeakerRender tgt_spk{1.0, {320.0 + rng.uniform(-20, 20), 410.0 + rng.uniform(-20, 20)}, 0.3};
  SpeakerRender src_spk{1.06, {300.0 + rng.uniform(-20, 20), 430.0 + rng.uniform(-20, 20)}, 0.3};
  render_lip_streams(tgt_lat, o, tgt_spk, &rng, &pair.tgt_lmk, &pair.tgt_limg);
  render_lip_streams(src_lat, o, src_spk, &rng, &pair.src_lmk, &pair.src_limg);
  return pair;
}

WarpedPair make_warped_pair(std::uint64_t seed, Index length, Index dim,
                            double snr_db, Index segments) {
  Rng rng(seed);
  WarpedPair out;
  const Index ts = length;
  out.src.resize(ts, dim);
  Eigen::VectorXd state = rng.normal_vector(dim);
  for (Index t = 0; t < ts; ++t) {
    state = 0.7 * state + rng.normal_vector(dim);
    out.src.row(t) = state.transpose();
  }

  const Index tt = std::max<Index>(
      2, std::lround(static_cast<double>(ts) * rng.uniform(0.75, 1.3)));
  // Piecewise-linear monotone warp from target frames to source positions.
  const int knots = 6;
  std::vector<double> inc(knots);
  double total = 0.0;
  for (double &v : inc) total += (v = rng.uniform(0.5, 1.5));
  std::vector<double> kx(knots + 1), ky(knots + 1);
  for (int k = 0; k <= knots; ++k) kx[k] = static_cast<double>(tt - 1) * k / knots;
  ky[0] = 0.0;
  for (int k = 0; k < knots; ++k) ky[k + 1] = ky[k] + inc[k] / total * (ts - 1);
  auto warp = [&](double j) {
    int k = std::min(static_cast<int>(j / kx[1]), knots - 1);
    double f = (j - kx[k]) / (kx[k + 1] - kx[k]);
    return ky[k] + f * (ky[k + 1] - ky[k]);
  };

  out.tgt.resize(tt, dim);
  std::vector<double> pos(static_cast<size_t>(tt));
  for (Index j = 0; j < tt; ++j) {
    const double w = std::clamp(warp(static_cast<double>(j)), 0.0,
                                static_cast<double>(ts - 1));
    pos[static_cast<size_t>(j)] = w;
    const Index lo = static_cast<Index>(std::floor(w));
    const Index hi = std::min(lo + 1, ts - 1);
    const double f = w - lo;
    out.tgt.row(j) = out.src.row(lo) + f * (out.src.row(hi) - out.src.row(lo));
  }
  const double power = out.tgt.squaredNorm() / static_cast<double>(out.tgt.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  for (Index j = 0; j < tt; ++j)
    out.tgt.row(j) += sigma * rng.normal_vector(dim).transpose();

  const double p = out.frame_period_ms;
  std::vector<double> bounds;
  for (Index k = 0; k <= segments; ++k)
    bounds.push_back(std::round(static_cast<double>(k * ts) / segments));
  for (Index k = 0; k < segments; ++k)
    out.src_lab.segments.push_back(
        {bounds[k] * p, bounds[k + 1] * p, "seg" + std::to_string(k)});
  // Target frame j belongs to the source segment holding its warped center.
  Index cur = -1, start = 0;
  for (Index j = 0; j <= tt; ++j) {
    Index s = -1;
    if (j < tt) {
      const double c = pos[static_cast<size_t>(j)] + 0.5;
      s = static_cast<Index>(std::upper_bound(bounds.begin(), bounds.end(), c) -
                             bounds.begin()) - 1;
      s = std::clamp<Index>(s, 0, segments - 1);
    }
    if (s != cur) {
      if (cur >= 0)
        out.tgt_lab.segments.push_back(
            {static_cast<double>(start) * p, static_cast<double>(j) * p,
             "seg" + std::to_string(cur)});
      cur = s;
      start = j;
    }
  }
  return out;
}

}  // namespace elalign
