// src/audio_io.cc

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

#include "spkidx/audio_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>

#include "spkidx/error.h"

namespace spkidx {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t ReadU16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t ReadU32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void PutU16(std::ostream &out, uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF),
                     static_cast<char>((v >> 8) & 0xFF)};
  out.write(b, 2);
}

void PutU32(std::ostream &out, uint32_t v) {
  const char b[4] = {
      static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
      static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

std::vector<unsigned char> Slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> SplitWhitespace(const std::string &line) {
  std::istringstream is(line);
  return {std::istream_iterator<std::string>(is),
          std::istream_iterator<std::string>()};
}

template <typename T>
bool ParseNumber(const std::string &s, T *out) {
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

AudioBuffer ReadWav(const std::filesystem::path &path) {
  const std::vector<unsigned char> bytes = Slurp(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE")
    throw Error(ErrorKind::kNotWav, name + " is not a RIFF/WAVE file");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char *data = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    const size_t size = ReadU32(&bytes[pos + 4]);
    const size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size())
        throw Error(ErrorKind::kNotWav, name + ": truncated fmt chunk");
      format = ReadU16(&bytes[body]);
      channels = ReadU16(&bytes[body + 2]);
      rate = ReadU32(&bytes[body + 4]);
      bits = ReadU16(&bytes[body + 14]);
      if (format == kFormatExtensible && size >= 26)
        format = ReadU16(&bytes[body + 24]);  // sub-format GUID, first 2 bytes
      have_fmt = true;
    } else if (id == "data") {
      if (body + size > bytes.size())
        throw Error(ErrorKind::kNotWav, name + ": truncated data chunk");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || data == nullptr)
    throw Error(ErrorKind::kNotWav, name + ": missing fmt or data chunk");
  if (format != kFormatPcm || bits != 16)
    throw Error(ErrorKind::kUnsupportedEncoding,
                name + ": only 16-bit PCM is supported (format " +
                    std::to_string(format) + ", " + std::to_string(bits) +
                    " bits)");
  if (channels != 1 && channels != 2)
    throw Error(ErrorKind::kUnsupportedEncoding,
                name + ": " + std::to_string(channels) + " channels");
  if (rate != static_cast<uint32_t>(kSampleRate))
    throw Error(ErrorKind::kBadSampleRate,
                name + ": sample rate " + std::to_string(rate) +
                    ", expected " + std::to_string(kSampleRate));

  const size_t n = data_size / (2u * channels);
  AudioBuffer buf;
  buf.sample_rate = kSampleRate;
  buf.channels = 1;
  buf.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const unsigned char *frame = data + i * 2 * channels;
    const auto x = static_cast<int16_t>(ReadU16(frame));
    if (channels == 1) {
      buf.samples[i] = x;
    } else {
      const auto y = static_cast<int16_t>(ReadU16(frame + 2));
      buf.samples[i] = static_cast<int16_t>(std::lround((x + y) / 2.0));
    }
  }
  return buf;
}

void WriteWav(const std::filesystem::path &path, const AudioBuffer &buf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  const auto channels = static_cast<uint16_t>(buf.channels);
  const auto data_size = static_cast<uint32_t>(buf.samples.size() * 2);
  out.write("RIFF", 4);
  PutU32(out, 36 + data_size);
  out.write("WAVEfmt ", 8);
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, channels);
  PutU32(out, static_cast<uint32_t>(buf.sample_rate));
  PutU32(out, static_cast<uint32_t>(buf.sample_rate) * channels * 2);
  PutU16(out, static_cast<uint16_t>(channels * 2));
  PutU16(out, 16);
  out.write("data", 4);
  PutU32(out, data_size);
  for (int16_t s : buf.samples) PutU16(out, static_cast<uint16_t>(s));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

std::vector<SegmentSpan> ParseSegments(std::istream &in) {
  std::vector<SegmentSpan> spans;
  std::set<int> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = SplitWhitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() < 3 || fields.size() > 4)
      throw Error(ErrorKind::kParse, where + ": expected 3 or 4 fields");
    SegmentSpan span;
    if (!ParseNumber(fields[0], &span.id) ||
        !ParseNumber(fields[1], &span.start) ||
        !ParseNumber(fields[2], &span.end))
      throw Error(ErrorKind::kParse, where + ": bad number in '" + line + "'");
    if (span.start < 0.0 || !(span.end > span.start))
      throw Error(ErrorKind::kParse, where + ": need 0 <= start < end");
    if (fields.size() == 4) span.speaker = fields[3];
    if (!ids.insert(span.id).second)
      throw Error(ErrorKind::kParse,
                  where + ": duplicate segment id " + std::to_string(span.id));
    spans.push_back(std::move(span));
  }
  std::stable_sort(spans.begin(), spans.end(),
                   [](const SegmentSpan &a, const SegmentSpan &b) {
                     return a.start < b.start;
                   });
  for (size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].start < spans[i - 1].end)
      throw Error(ErrorKind::kOverlap,
                  "segments " + std::to_string(spans[i - 1].id) + " and " +
                      std::to_string(spans[i].id) + " overlap");
  }
  return spans;
}

std::vector<SegmentSpan> LoadSegments(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return ParseSegments(in);
  } catch (const Error &e) {
    if (e.is_io()) throw;
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void WriteSegments(const std::filesystem::path &path,
                   const std::vector<SegmentSpan> &spans) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "# id start_s end_s speaker\n";
  for (const auto &s : spans) {
    out << s.id << ' ' << std::setprecision(17) << s.start << ' ' << s.end;
    if (s.speaker) out << ' ' << *s.speaker;
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

size_t SampleIndex(double seconds, int sample_rate) {
  // Times are written in decimal; the small offset keeps e.g. 0.3 s at
  // sample 4800 instead of 4799 after binary rounding.
  return static_cast<size_t>(std::floor(seconds * sample_rate + 1e-6));
}

AudioBuffer SliceSegment(const AudioBuffer &buf, const SegmentSpan &span) {
  if (buf.channels != 1)
    throw Error(ErrorKind::kInvalidArgument, "SliceSegment expects mono audio");
  const size_t begin = SampleIndex(span.start, buf.sample_rate);
  const size_t end = SampleIndex(span.end, buf.sample_rate);
  if (span.start < 0.0 || end > buf.samples.size() || begin > end) {
    std::ostringstream msg;
    msg << "segment " << span.id << " [" << span.start << ", " << span.end
        << ") outside buffer of " << buf.duration() << " s";
    throw Error(ErrorKind::kOutOfRange, msg.str());
  }
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.channels = 1;
  out.samples.assign(buf.samples.begin() + begin, buf.samples.begin() + end);
  return out;
}

}  // namespace spkidx
