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

#include "elalign/seqio.h"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>

#include "text-util.h"

namespace elalign {

namespace fs = std::filesystem;

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kWrongColumnCount: return "WrongColumnCount";
    case ErrorCode::kNonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::kOverlappingSegments: return "OverlappingSegments";
    case ErrorCode::kInvertedSegment: return "InvertedSegment";
    case ErrorCode::kInvalidPath: return "InvalidPath";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kUnknownRole: return "UnknownRole";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kWrongPointCount: return "WrongPointCount";
    case ErrorCode::kStackSizeMismatch: return "StackSizeMismatch";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kBandInfeasible: return "BandInfeasible";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::kAllSilent: return "AllSilent";
    case ErrorCode::kPathOutOfRange: return "PathOutOfRange";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kWrongFeatureKind: return "WrongFeatureKind";
    case ErrorCode::kSegmentCountMismatch: return "SegmentCountMismatch";
    case ErrorCode::kNoVoicedOverlap: return "NoVoicedOverlap";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Byte and text helpers shared by the readers (declared in text-util.h).

std::string read_file_bytes(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path &path, const std::string &bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error(ErrorCode::kIoError, "short write on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot rename " + tmp.string() + ": " + ec.message());
  }
}

std::string format_real(double value) {
  std::array<char, 64> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string_view line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = pos + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view field, const std::string &where) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::kParseError,
                where + ": not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteValue, where + ": non-finite value");
  }
  return value;
}

std::int64_t parse_int(std::string_view field, const std::string &where) {
  field = trim(field);
  std::int64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::kParseError,
                where + ": not an integer: '" + std::string(field) + "'");
  }
  return value;
}

namespace {

void put_u32(std::string *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string *out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Sequential little-endian reader that reports the byte offset on failure.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

  void need(size_t n, const char *what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  name_ + ": expected " + std::to_string(n) + " bytes of " +
                      what + " at byte offset " + std::to_string(pos_) +
                      ", file has " + std::to_string(bytes_.size()));
    }
  }

  void magic(std::string_view expected) {
    if (bytes_.substr(0, expected.size()) != expected) {
      throw Error(ErrorCode::kBadMagic,
                  name_ + ": expected magic \"" + std::string(expected) +
                      "\" at byte offset 0");
    }
    pos_ = expected.size();
  }

  std::uint32_t u32(const char *what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char *what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64(const char *what) {
    size_t at = pos_;
    double v = std::bit_cast<double>(u64(what));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  name_ + ": non-finite " + what + " at byte offset " +
                      std::to_string(at));
    }
    return v;
  }

  float f32(const char *what) {
    size_t at = pos_;
    float v = std::bit_cast<float>(u32(what));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  name_ + ": non-finite " + what + " at byte offset " +
                      std::to_string(at));
    }
    return v;
  }

  const char *take(size_t n, const char *what) {
    need(n, what);
    const char *p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  void expect_end() const {
    if (remaining() != 0) {
      throw Error(ErrorCode::kParseError,
                  name_ + ": " + std::to_string(remaining()) +
                      " trailing bytes at byte offset " + std::to_string(pos_));
    }
  }

 private:
  std::string_view bytes_;
  std::string name_;
  size_t pos_ = 0;
};

std::string line_ref(const fs::path &path, size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

}  // namespace

// ---------------------------------------------------------------------------

void LipImageSequence::append(const GrayImage &image) {
  if (num_frames == 0 && pixels.empty()) {
    height = image.rows();
    width = image.cols();
  }
  if (image.rows() != height || image.cols() != width) {
    throw Error(ErrorCode::kDimensionMismatch,
                "lip image is " + std::to_string(image.rows()) + "x" +
                    std::to_string(image.cols()) + ", sequence is " +
                    std::to_string(height) + "x" + std::to_string(width));
  }
  pixels.insert(pixels.end(), image.data(), image.data() + image.size());
  ++num_frames;
}

Index BoundarySegmentation::find(double t_ms) const {
  auto it = std::upper_bound(
      segments.begin(), segments.end(), t_ms,
      [](double t, const Segment &s) { return t < s.start_ms; });
  if (it == segments.begin()) return -1;
  --it;
  if (t_ms < it->end_ms) return static_cast<Index>(it - segments.begin());
  return -1;
}

void validate_segmentation(BoundarySegmentation *seg) {
  for (const Segment &s : seg->segments) {
    if (!(s.start_ms < s.end_ms)) {
      throw Error(ErrorCode::kInvertedSegment,
                  "segment '" + s.label + "' has start " +
                      format_real(s.start_ms) + " >= end " +
                      format_real(s.end_ms));
    }
  }
  std::stable_sort(seg->segments.begin(), seg->segments.end(),
                   [](const Segment &a, const Segment &b) {
                     return a.start_ms < b.start_ms;
                   });
  for (size_t i = 1; i < seg->segments.size(); ++i) {
    const Segment &prev = seg->segments[i - 1];
    const Segment &cur = seg->segments[i];
    if (cur.start_ms < prev.end_ms) {
      throw Error(ErrorCode::kOverlappingSegments,
                  "segment '" + cur.label + "' starts at " +
                      format_real(cur.start_ms) + " before '" + prev.label +
                      "' ends at " + format_real(prev.end_ms));
    }
  }
}

AlignmentPath::AlignmentPath(std::vector<PathPoint> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::kInvalidPath, "empty path");
  if (points_.front() != PathPoint{0, 0}) {
    throw Error(ErrorCode::kInvalidPath,
                "path starts at (" + std::to_string(points_.front().src) +
                    "," + std::to_string(points_.front().tgt) +
                    ") instead of (0,0)");
  }
  for (size_t k = 1; k < points_.size(); ++k) {
    Index ds = points_[k].src - points_[k - 1].src;
    Index dt = points_[k].tgt - points_[k - 1].tgt;
    bool ok = (ds == 0 || ds == 1) && (dt == 0 || dt == 1) && (ds + dt > 0);
    if (!ok) {
      throw Error(ErrorCode::kInvalidPath,
                  "illegal step (" + std::to_string(ds) + "," +
                      std::to_string(dt) + ") at point " + std::to_string(k));
    }
  }
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSrcMcep: return "src_mcep";
    case Role::kTgtMcep: return "tgt_mcep";
    case Role::kSrcF0: return "src_f0";
    case Role::kTgtF0: return "tgt_f0";
    case Role::kSrcLmk: return "src_lmk";
    case Role::kTgtLmk: return "tgt_lmk";
    case Role::kSrcLimg: return "src_limg";
    case Role::kTgtLimg: return "tgt_limg";
    case Role::kSrcLab: return "src_lab";
    case Role::kTgtLab: return "tgt_lab";
  }
  return "unknown";
}

fs::path PairManifest::resolve(const ManifestEntry &entry, Role role) const {
  auto it = entry.files.find(role);
  if (it == entry.files.end()) {
    throw Error(ErrorCode::kMissingFile, "utterance '" + entry.id +
                                             "' has no " +
                                             std::string(role_name(role)));
  }
  if (it->second.is_absolute()) return it->second;
  return base_dir / it->second;
}

// ---------------------------------------------------------------------------
// FSQ1

FeatureSequence read_feature_sequence(const fs::path &path, FeatureKind kind) {
  std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, path.string());
  r.magic("FSQ1");
  std::uint32_t t = r.u32("frame count");
  size_t dim_offset = r.offset();
  std::uint32_t d = r.u32("dimension");
  if (d == 0) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": dimension 0 at byte offset " +
                    std::to_string(dim_offset));
  }
  size_t period_offset = r.offset();
  double period = r.f64("frame period");
  if (!(period > 0.0)) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": frame period must be > 0 at byte offset " +
                    std::to_string(period_offset));
  }
  FeatureSequence seq;
  seq.frame_period_ms = period;
  seq.kind = kind;
  seq.frames.resize(t, d);
  r.need(static_cast<size_t>(t) * d * 4, "frame payload");
  for (std::uint32_t i = 0; i < t; ++i)
    for (std::uint32_t j = 0; j < d; ++j) seq.frames(i, j) = r.f32("value");
  r.expect_end();
  return seq;
}

void write_feature_sequence(const fs::path &path, const FeatureSequence &seq) {
  if (seq.dim() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimension must be >= 1");
  }
  if (!seq.frames.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue,
                "refusing to write non-finite features to " + path.string());
  }
  std::string out = "FSQ1";
  out.reserve(20 + seq.frames.size() * 4);
  put_u32(&out, static_cast<std::uint32_t>(seq.num_frames()));
  put_u32(&out, static_cast<std::uint32_t>(seq.dim()));
  put_u64(&out, std::bit_cast<std::uint64_t>(seq.frame_period_ms));
  for (Index i = 0; i < seq.num_frames(); ++i)
    for (Index j = 0; j < seq.dim(); ++j)
      put_u32(&out, std::bit_cast<std::uint32_t>(seq.frames(i, j)));
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// LIM1

LipImageSequence read_lip_images(const fs::path &path, double video_fps) {
  std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, path.string());
  r.magic("LIM1");
  std::uint32_t n = r.u32("frame count");
  std::uint32_t h = r.u32("height");
  std::uint32_t w = r.u32("width");
  size_t ch_offset = r.offset();
  std::uint32_t channels = r.u32("channels");
  if (channels != 1) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": channels must be 1, got " +
                    std::to_string(channels) + " at byte offset " +
                    std::to_string(ch_offset));
  }
  if (h == 0 || w == 0) {
    throw Error(ErrorCode::kEmptyImage,
                path.string() + ": zero image size in header");
  }
  LipImageSequence seq;
  seq.num_frames = n;
  seq.height = h;
  seq.width = w;
  seq.video_fps = video_fps;
  size_t payload = static_cast<size_t>(n) * h * w;
  const char *p = r.take(payload, "pixel payload");
  seq.pixels.assign(reinterpret_cast<const std::uint8_t *>(p),
                    reinterpret_cast<const std::uint8_t *>(p) + payload);
  r.expect_end();
  return seq;
}

void write_lip_images(const fs::path &path, const LipImageSequence &seq) {
  if (seq.height < 1 || seq.width < 1) {
    throw Error(ErrorCode::kEmptyImage, "lip images must be at least 1x1");
  }
  if (static_cast<Index>(seq.pixels.size()) !=
      seq.num_frames * seq.height * seq.width) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pixel buffer size does not match N*H*W");
  }
  std::string out = "LIM1";
  put_u32(&out, static_cast<std::uint32_t>(seq.num_frames));
  put_u32(&out, static_cast<std::uint32_t>(seq.height));
  put_u32(&out, static_cast<std::uint32_t>(seq.width));
  put_u32(&out, 1);
  out.append(reinterpret_cast<const char *>(seq.pixels.data()),
             seq.pixels.size());
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Landmark CSV

namespace {

std::string landmark_header() {
  std::string h = "frame,t_ms";
  for (int i = 1; i <= kNumLipLandmarks; ++i)
    h += ",x" + std::to_string(i) + ",y" + std::to_string(i);
  return h;
}

constexpr size_t kLandmarkColumns = 2 + 2 * kNumLipLandmarks;

}  // namespace

LipLandmarkSequence read_landmarks(const fs::path &path, double video_fps) {
  std::string text = read_file_bytes(path);
  auto lines = split_lines(text);
  if (lines.empty()) {
    throw Error(ErrorCode::kParseError, path.string() + ": missing header");
  }
  auto header = split(lines[0], ',');
  if (header.size() != kLandmarkColumns) {
    throw Error(ErrorCode::kWrongColumnCount,
                line_ref(path, 1) + ": header has " +
                    std::to_string(header.size()) + " columns, expected " +
                    std::to_string(kLandmarkColumns));
  }
  if (lines[0] != landmark_header()) {
    throw Error(ErrorCode::kParseError,
                line_ref(path, 1) + ": header must be frame,t_ms,x1,y1,...,x20,y20");
  }
  LipLandmarkSequence seq;
  seq.video_fps = video_fps;
  for (size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    std::string where = line_ref(path, ln + 1);
    auto fields = split(lines[ln], ',');
    if (fields.size() != kLandmarkColumns) {
      throw Error(ErrorCode::kWrongColumnCount,
                  where + ": " + std::to_string(fields.size()) +
                      " columns, expected " + std::to_string(kLandmarkColumns));
    }
    LandmarkFrame f;
    f.frame = parse_int(fields[0], where);
    f.t_ms = parse_real(fields[1], where);
    if (f.t_ms < 0.0) {
      throw Error(ErrorCode::kNonMonotoneTime, where + ": negative t_ms");
    }
    if (!seq.frames.empty() && f.t_ms < seq.frames.back().t_ms) {
      throw Error(ErrorCode::kNonMonotoneTime,
                  where + ": t_ms " + format_real(f.t_ms) +
                      " decreases from " + format_real(seq.frames.back().t_ms));
    }
    for (int i = 0; i < kNumLipLandmarks; ++i) {
      f.points(i, 0) = parse_real(fields[2 + 2 * i], where);
      f.points(i, 1) = parse_real(fields[3 + 2 * i], where);
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

void write_landmarks(const fs::path &path, const LipLandmarkSequence &seq) {
  std::string out = landmark_header() + "\n";
  double last_t = 0.0;
  for (size_t k = 0; k < seq.frames.size(); ++k) {
    const LandmarkFrame &f = seq.frames[k];
    if (f.points.rows() != kNumLipLandmarks) {
      throw Error(ErrorCode::kWrongPointCount,
                  "landmark frame " + std::to_string(k) + " has " +
                      std::to_string(f.points.rows()) + " points");
    }
    if (f.t_ms < 0.0 || (k > 0 && f.t_ms < last_t)) {
      throw Error(ErrorCode::kNonMonotoneTime,
                  "landmark frame " + std::to_string(k) + " goes back in time");
    }
    if (!f.points.allFinite() || !std::isfinite(f.t_ms)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "landmark frame " + std::to_string(k) + " is non-finite");
    }
    last_t = f.t_ms;
    out += std::to_string(f.frame) + "," + format_real(f.t_ms);
    for (int i = 0; i < kNumLipLandmarks; ++i)
      out += "," + format_real(f.points(i, 0)) + "," + format_real(f.points(i, 1));
    out += "\n";
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Boundary TSV

BoundarySegmentation read_boundaries(const fs::path &path) {
  std::string text = read_file_bytes(path);
  BoundarySegmentation seg;
  auto lines = split_lines(text);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    std::string where = line_ref(path, ln + 1);
    auto fields = split(lines[ln], '\t');
    if (fields.size() != 3) {
      throw Error(ErrorCode::kWrongColumnCount,
                  where + ": expected start_ms<TAB>end_ms<TAB>label");
    }
    Segment s;
    s.start_ms = parse_real(fields[0], where);
    s.end_ms = parse_real(fields[1], where);
    s.label = std::string(fields[2]);
    if (!(s.start_ms < s.end_ms)) {
      throw Error(ErrorCode::kInvertedSegment,
                  where + ": start " + format_real(s.start_ms) +
                      " is not before end " + format_real(s.end_ms));
    }
    seg.segments.push_back(std::move(s));
  }
  try {
    validate_segmentation(&seg);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  return seg;
}

void write_boundaries(const fs::path &path, const BoundarySegmentation &seg) {
  BoundarySegmentation copy = seg;
  validate_segmentation(&copy);
  std::string out;
  for (const Segment &s : copy.segments) {
    if (s.label.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment label contains a tab or newline");
    }
    out += format_real(s.start_ms) + "\t" + format_real(s.end_ms) + "\t" +
           s.label + "\n";
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Path CSV

AlignmentPath read_path(const fs::path &path) {
  std::string text = read_file_bytes(path);
  auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "src,tgt") {
    throw Error(ErrorCode::kParseError,
                line_ref(path, 1) + ": header must be src,tgt");
  }
  std::vector<PathPoint> points;
  for (size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    std::string where = line_ref(path, ln + 1);
    auto fields = split(lines[ln], ',');
    if (fields.size() != 2) {
      throw Error(ErrorCode::kWrongColumnCount, where + ": expected src,tgt");
    }
    points.push_back({parse_int(fields[0], where), parse_int(fields[1], where)});
  }
  try {
    return AlignmentPath(std::move(points));
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_path(const fs::path &path, const AlignmentPath &ali) {
  std::string out = "src,tgt\n";
  for (const PathPoint &p : ali.points())
    out += std::to_string(p.src) + "," + std::to_string(p.tgt) + "\n";
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Manifest TSV

namespace {

constexpr std::array<Role, 10> kAllRoles = {
    Role::kSrcMcep, Role::kTgtMcep, Role::kSrcF0,   Role::kTgtF0,
    Role::kSrcLmk,  Role::kTgtLmk,  Role::kSrcLimg, Role::kTgtLimg,
    Role::kSrcLab,  Role::kTgtLab};

}  // namespace

PairManifest read_manifest(const fs::path &path) {
  std::string text = read_file_bytes(path);
  PairManifest manifest;
  manifest.base_dir = path.parent_path();
  std::set<std::string> ids;
  auto lines = split_lines(text);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    std::string where = line_ref(path, ln + 1);
    auto fields = split(lines[ln], '\t');
    ManifestEntry entry;
    entry.id = std::string(trim(fields[0]));
    if (entry.id.empty()) throw Error(ErrorCode::kParseError, where + ": empty id");
    if (!ids.insert(entry.id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  where + ": utterance id '" + entry.id + "' repeated");
    }
    for (size_t f = 1; f < fields.size(); ++f) {
      std::string_view field = trim(fields[f]);
      if (field.empty()) continue;
      size_t colon = field.find(':');
      if (colon == std::string_view::npos) {
        throw Error(ErrorCode::kParseError,
                    where + ": field '" + std::string(field) +
                        "' is not role:path");
      }
      std::string_view name = field.substr(0, colon);
      auto it = std::find_if(kAllRoles.begin(), kAllRoles.end(),
                             [&](Role r) { return role_name(r) == name; });
      if (it == kAllRoles.end()) {
        throw Error(ErrorCode::kUnknownRole,
                    where + ": unknown role '" + std::string(name) + "'");
      }
      if (!entry.files.emplace(*it, fs::path(field.substr(colon + 1))).second) {
        throw Error(ErrorCode::kParseError,
                    where + ": role '" + std::string(name) + "' repeated");
      }
    }
    for (const auto &[role, file] : entry.files) {
      fs::path resolved = manifest.resolve(entry, role);
      if (!fs::exists(resolved)) {
        throw Error(ErrorCode::kMissingFile,
                    where + ": " + std::string(role_name(role)) + " file " +
                        resolved.string() + " does not exist");
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const fs::path &path, const PairManifest &manifest) {
  std::string out;
  for (const ManifestEntry &e : manifest.entries) {
    out += e.id;
    for (Role role : kAllRoles) {
      auto it = e.files.find(role);
      if (it == e.files.end()) continue;
      out += "\t" + std::string(role_name(role)) + ":" + it->second.generic_string();
    }
    out += "\n";
  }
  write_file_atomic(path, out);
}

}  // namespace elalign
