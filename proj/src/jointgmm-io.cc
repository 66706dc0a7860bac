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

#include <bit>
#include <cmath>

#include "elalign/jointgmm.h"
#include "text-util.h"

namespace elalign {

void validate_gmm(const JointGmmd &model) {
  const Index m = model.num_mixtures();
  const Index d = model.dim();
  if (m < 1 || model.dx < 1 || model.dy < 1) {
    throw Error(ErrorCode::kInvalidArgument, "GMM needs M, dx, dy >= 1");
  }
  if (model.means.rows() != m || model.means.cols() != d ||
      static_cast<Index>(model.covariances.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "GMM parameter shapes disagree");
  }
  if ((model.weights.array() < 0.0).any() ||
      std::abs(model.weights.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument,
                "GMM weights must be non-negative and sum to 1");
  }
  for (Index k = 0; k < m; ++k) {
    const auto &s = model.covariances[k];
    if (s.rows() != d || s.cols() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "covariance has wrong shape");
    }
    if (!s.isApprox(s.transpose(), 1e-12)) {
      throw Error(ErrorCode::kDegenerateCovariance,
                  "covariance " + std::to_string(k) + " is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kDegenerateCovariance,
                  "covariance " + std::to_string(k) + " is not positive definite");
    }
  }
}

namespace {

void put_u32(std::string *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string *out, double value) {
  std::uint64_t v = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Cursor {
 public:
  Cursor(const std::string &bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  void need(size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  name_ + ": needs " + std::to_string(n) +
                      " more bytes at byte offset " + std::to_string(pos_));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    const size_t at = pos_;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    double d = std::bit_cast<double>(v);
    if (!std::isfinite(d)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  name_ + ": non-finite value at byte offset " + std::to_string(at));
    }
    return d;
  }
  size_t pos() const { return pos_; }
  void skip(size_t n) { pos_ += n; }
  size_t size() const { return bytes_.size(); }

 private:
  const std::string &bytes_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace

JointGmmd read_gmm(const std::filesystem::path &path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.compare(0, 4, "LGM1") != 0) {
    throw Error(ErrorCode::kBadMagic,
                path.string() + ": expected magic \"LGM1\" at byte offset 0");
  }
  Cursor c(bytes, path.string());
  c.skip(4);
  const std::uint32_t m = c.u32();
  const std::uint32_t dx = c.u32();
  const std::uint32_t dy = c.u32();
  const Index d = static_cast<Index>(dx) + dy;
  c.need(8 * (static_cast<size_t>(m) * (1 + d + d * d)));
  JointGmmd model;
  model.dx = dx;
  model.dy = dy;
  model.weights.resize(m);
  for (std::uint32_t k = 0; k < m; ++k) model.weights(k) = c.f64();
  model.means.resize(m, d);
  for (std::uint32_t k = 0; k < m; ++k)
    for (Index j = 0; j < d; ++j) model.means(k, j) = c.f64();
  model.covariances.assign(m, Eigen::MatrixXd(d, d));
  for (std::uint32_t k = 0; k < m; ++k)
    for (Index r = 0; r < d; ++r)
      for (Index j = 0; j < d; ++j) model.covariances[k](r, j) = c.f64();
  if (c.pos() != c.size()) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": trailing bytes at byte offset " +
                    std::to_string(c.pos()));
  }
  try {
    validate_gmm(model);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  return model;
}

void write_gmm(const std::filesystem::path &path, const JointGmmd &model) {
  validate_gmm(model);
  const Index d = model.dim();
  std::string out = "LGM1";
  put_u32(&out, static_cast<std::uint32_t>(model.num_mixtures()));
  put_u32(&out, static_cast<std::uint32_t>(model.dx));
  put_u32(&out, static_cast<std::uint32_t>(model.dy));
  for (Index k = 0; k < model.num_mixtures(); ++k) put_f64(&out, model.weights(k));
  for (Index k = 0; k < model.num_mixtures(); ++k)
    for (Index j = 0; j < d; ++j) put_f64(&out, model.means(k, j));
  for (Index k = 0; k < model.num_mixtures(); ++k)
    for (Index r = 0; r < d; ++r)
      for (Index j = 0; j < d; ++j) put_f64(&out, model.covariances[k](r, j));
  write_file_atomic(path, out);
}

}  // namespace elalign
