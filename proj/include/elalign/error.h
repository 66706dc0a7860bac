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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elalign {

enum class ErrorCode {
  // seqio
  kBadMagic,
  kTruncatedFile,
  kNonFiniteValue,
  kWrongColumnCount,
  kNonMonotoneTime,
  kOverlappingSegments,
  kInvertedSegment,
  kInvalidPath,
  kDuplicateId,
  kMissingFile,
  kUnknownRole,
  kParseError,
  kIoError,
  // framedist
  kDimensionMismatch,
  kEmptyImage,
  kWrongPointCount,
  kStackSizeMismatch,
  // dtw
  kEmptySequence,
  kBandInfeasible,
  kTooLarge,
  // jointgmm
  kTooFewSamples,
  kDegenerateCovariance,
  // alignpipe
  kAllSilent,
  kPathOutOfRange,
  kLengthMismatch,
  kWrongFeatureKind,
  // evalkit
  kSegmentCountMismatch,
  kNoVoicedOverlap,
  kInvalidArgument,
};

std::string_view error_name(ErrorCode code);

// Every failure in the library surfaces as an Error carrying a code; the
// message is prefixed with the code name so CLI output names the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace elalign
