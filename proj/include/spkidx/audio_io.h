// spkidx/audio_io.h

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

#ifndef SPKIDX_AUDIO_IO_H_
#define SPKIDX_AUDIO_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spkidx {

inline constexpr int kSampleRate = 16000;

/// PCM samples, interleaved when channels > 1. Buffers returned by ReadWav
/// are always mono at kSampleRate.
struct AudioBuffer {
  std::vector<int16_t> samples;
  int sample_rate = kSampleRate;
  int channels = 1;

  size_t num_frames() const { return samples.size() / channels; }
  double duration() const {
    return static_cast<double>(num_frames()) / sample_rate;
  }
  bool operator==(const AudioBuffer &) const = default;
};

/// One speaker-homogeneous span of a recording, [start, end) in seconds.
struct SegmentSpan {
  int id = 0;
  double start = 0.0;
  double end = 0.0;
  std::optional<std::string> speaker;

  double duration() const { return end - start; }
  bool operator==(const SegmentSpan &) const = default;
};

/// Reads a RIFF/WAVE PCM 16-bit file. Stereo input is downmixed to mono by
/// averaging the two channels (rounded half away from zero).
/// Throws kNotWav, kUnsupportedEncoding, kBadSampleRate or kIo.
AudioBuffer ReadWav(const std::filesystem::path &path);

/// Writes a canonical 44-byte-header PCM WAV. Interleaved if channels > 1.
void WriteWav(const std::filesystem::path &path, const AudioBuffer &buf);

/// Parses the segment list format: one `<id> <start_s> <end_s> [speaker]`
/// per line, `#` comment lines. Result is sorted by start time.
/// Throws kParse (malformed line, duplicate id, end <= start) or kOverlap.
std::vector<SegmentSpan> ParseSegments(std::istream &in);
std::vector<SegmentSpan> LoadSegments(const std::filesystem::path &path);
void WriteSegments(const std::filesystem::path &path,
                   const std::vector<SegmentSpan> &spans);

/// Sample index of a time point: floor(t * sample_rate).
size_t SampleIndex(double seconds, int sample_rate);

/// Samples [floor(start*sr), floor(end*sr)) of a mono buffer.
/// Throws kOutOfRange when the span reaches past the end of the buffer.
AudioBuffer SliceSegment(const AudioBuffer &buf, const SegmentSpan &span);

}  // namespace spkidx

#endif  // SPKIDX_AUDIO_IO_H_
