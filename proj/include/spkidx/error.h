// spkidx/error.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SPKIDX_ERROR_H_
#define SPKIDX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace spkidx {

enum class ErrorKind {
  // I/O
  kIo,
  // audio_io
  kNotWav,
  kUnsupportedEncoding,
  kBadSampleRate,
  kParse,
  kOverlap,
  kOutOfRange,
  // features / file formats
  kBadMagic,
  kDimensionMismatch,
  // statistics
  kEmptySegment,
  kNotPosDef,
  // codebook
  kTooFewFrames,
  // threshold
  kHalfTooShort,
  kTooFewUsableSegments,
  kEstimationFailed,
  // clustering / metrics
  kZeroVector,
  kKeyMismatch,
  kInvalidArgument,
  // config
  kConfig,
};

std::string_view ErrorKindName(ErrorKind kind);

/// Single exception type for the library. The kind decides how callers react
/// (skip a segment, abort, pick an exit code); the message carries context.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string &detail() const noexcept { return detail_; }
  bool is_io() const noexcept { return kind_ == ErrorKind::kIo; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace spkidx

#endif  // SPKIDX_ERROR_H_
