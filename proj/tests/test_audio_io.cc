// tests/test_audio_io.cc

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

#include <cstring>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "spkidx/audio_io.h"
#include "spkidx/error.h"

using namespace spkidx;

namespace {

void Put16(std::string *b, uint16_t v) {
  b->push_back(static_cast<char>(v & 0xFF));
  b->push_back(static_cast<char>(v >> 8));
}
void Put32(std::string *b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-built canonical PCM file, with an unrelated chunk before "data".
std::string WavBytes(int rate, int channels, const std::vector<int16_t> &pcm,
                     uint16_t format = 1, uint16_t bits = 16) {
  std::string fmt, body;
  Put16(&fmt, format);
  Put16(&fmt, static_cast<uint16_t>(channels));
  Put32(&fmt, static_cast<uint32_t>(rate));
  Put32(&fmt, static_cast<uint32_t>(rate * channels * bits / 8));
  Put16(&fmt, static_cast<uint16_t>(channels * bits / 8));
  Put16(&fmt, bits);
  body += "WAVE";
  body += "fmt ";
  Put32(&body, static_cast<uint32_t>(fmt.size()));
  body += fmt;
  body += "LIST";
  Put32(&body, 4);
  body += "INFO";
  body += "data";
  Put32(&body, static_cast<uint32_t>(pcm.size() * 2));
  for (int16_t s : pcm) Put16(&body, static_cast<uint16_t>(s));
  std::string out = "RIFF";
  Put32(&out, static_cast<uint32_t>(body.size()));
  return out + body;
}

void WriteBytes(const std::filesystem::path &p, const std::string &bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(),
                                            static_cast<std::streamsize>(bytes.size()));
}

template <typename Fn>
ErrorKind KindOf(Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("expected spkidx::Error");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_CASE("one second mono file has 16000 samples") {
  oracle::TempDir dir("wav");
  std::vector<int16_t> pcm(16000);
  for (size_t i = 0; i < pcm.size(); ++i) pcm[i] = static_cast<int16_t>(i % 2000 - 1000);
  WriteBytes(dir.path() / "a.wav", WavBytes(16000, 1, pcm));
  const AudioBuffer buf = ReadWav(dir.path() / "a.wav");
  CHECK(buf.samples.size() == 16000);
  CHECK(buf.channels == 1);
  CHECK(buf.duration() == doctest::Approx(1.0));
  CHECK(buf.samples == pcm);
}

TEST_CASE("stereo is averaged to mono with rounding") {
  oracle::TempDir dir("wav");
  const std::vector<int16_t> pcm = {100, 201, -5, -6, 32767, 32767, -32768, -32767, 3, -4};
  WriteBytes(dir.path() / "s.wav", WavBytes(16000, 2, pcm));
  const AudioBuffer buf = ReadWav(dir.path() / "s.wav");
  REQUIRE(buf.samples.size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    const double avg = (pcm[2 * i] + pcm[2 * i + 1]) / 2.0;
    CHECK(buf.samples[i] == static_cast<int16_t>(std::lround(avg)));
  }
}

TEST_CASE("wav rejects bad rate, encoding and non-wav files") {
  oracle::TempDir dir("wav");
  WriteBytes(dir.path() / "r.wav", WavBytes(8000, 1, {1, 2, 3}));
  CHECK(KindOf([&] { ReadWav(dir.path() / "r.wav"); }) == ErrorKind::kBadSampleRate);
  WriteBytes(dir.path() / "f.wav", WavBytes(16000, 1, {1, 2}, 3, 32));
  CHECK(KindOf([&] { ReadWav(dir.path() / "f.wav"); }) ==
        ErrorKind::kUnsupportedEncoding);
  WriteBytes(dir.path() / "n.wav", "hello world, not audio");
  CHECK(KindOf([&] { ReadWav(dir.path() / "n.wav"); }) == ErrorKind::kNotWav);
  CHECK(KindOf([&] { ReadWav(dir.path() / "missing.wav"); }) == ErrorKind::kIo);
}

TEST_CASE("wav write then read round trip") {
  oracle::TempDir dir("wav");
  std::mt19937_64 rng(3);
  AudioBuffer buf;
  for (int i = 0; i < 4321; ++i) buf.samples.push_back(static_cast<int16_t>(rng()));
  WriteWav(dir.path() / "rt.wav", buf);
  CHECK(ReadWav(dir.path() / "rt.wav") == buf);
}

TEST_CASE("segment list parsing") {
  std::istringstream one("3 12.50 17.20 spkA\n");
  const auto spans = ParseSegments(one);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].id == 3);
  CHECK(spans[0].start == 12.5);
  CHECK(spans[0].end == 17.2);
  CHECK(spans[0].speaker == std::optional<std::string>("spkA"));

  std::istringstream empty("");
  CHECK(ParseSegments(empty).empty());

  std::istringstream unlabeled("# comment\n\n7 0 1\n2 1 2.5 b\n");
  const auto two = ParseSegments(unlabeled);
  REQUIRE(two.size() == 2);
  CHECK(two[0].id == 7);  // ordered by start time
  CHECK_FALSE(two[0].speaker.has_value());

  std::istringstream touching("1 0 5 a\n2 5 6 b\n");
  CHECK(ParseSegments(touching).size() == 2);
}

TEST_CASE("segment list errors") {
  std::istringstream overlap("1 0 5 a\n2 4 6 b\n");
  CHECK(KindOf([&] { ParseSegments(overlap); }) == ErrorKind::kOverlap);
  std::istringstream reversed("1 5 4 a\n");
  CHECK(KindOf([&] { ParseSegments(reversed); }) == ErrorKind::kParse);
  std::istringstream dup("1 0 1 a\n1 2 3 a\n");
  CHECK(KindOf([&] { ParseSegments(dup); }) == ErrorKind::kParse);
  std::istringstream junk("1 zero 1 a\n");
  CHECK(KindOf([&] { ParseSegments(junk); }) == ErrorKind::kParse);
  std::istringstream fields("1 0\n");
  CHECK(KindOf([&] { ParseSegments(fields); }) == ErrorKind::kParse);
}

TEST_CASE("segment list write then load round trip") {
  oracle::TempDir dir("seg");
  const std::vector<SegmentSpan> spans = {{4, 0.0, 1.25, "x"},
                                          {9, 1.25, 3.1, std::nullopt},
                                          {2, 3.3333333333333335, 4.0, "y"}};
  WriteSegments(dir.path() / "s.txt", spans);
  CHECK(LoadSegments(dir.path() / "s.txt") == spans);
}

TEST_CASE("slicing") {
  AudioBuffer buf;
  buf.samples.resize(32000);
  for (size_t i = 0; i < buf.samples.size(); ++i)
    buf.samples[i] = static_cast<int16_t>(i % 30000);
  const AudioBuffer a = SliceSegment(buf, {0, 0.0, 1.0, std::nullopt});
  CHECK(a.samples.size() == 16000);
  const AudioBuffer b = SliceSegment(buf, {0, 0.5, 0.5 + 1e-3, std::nullopt});
  CHECK(b.samples.size() == 16);
  CHECK(b.samples.front() == buf.samples[8000]);
  CHECK(KindOf([&] { SliceSegment(buf, {0, 1.5, 3.0, std::nullopt}); }) ==
        ErrorKind::kOutOfRange);
  CHECK(SampleIndex(12.5, 16000) == 200000);
  // 1.001 * 16000 evaluates to 16015.999999999998 in binary floating point.
  CHECK(SampleIndex(1.001, 16000) == 16016);
}
