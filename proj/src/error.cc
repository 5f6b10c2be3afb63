// src/error.cc

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

#include "spkidx/error.h"

namespace spkidx {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kNotWav: return "NotWav";
    case ErrorKind::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::kBadSampleRate: return "BadSampleRate";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kOverlap: return "OverlapError";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptySegment: return "EmptySegment";
    case ErrorKind::kNotPosDef: return "NotPosDef";
    case ErrorKind::kTooFewFrames: return "TooFewFrames";
    case ErrorKind::kHalfTooShort: return "HalfTooShort";
    case ErrorKind::kTooFewUsableSegments: return "TooFewUsableSegments";
    case ErrorKind::kEstimationFailed: return "EstimationFailed";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kKeyMismatch: return "KeyMismatch";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kConfig: return "ConfigError";
  }
  return "Error";
}

}  // namespace spkidx
