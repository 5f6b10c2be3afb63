// tests/test_features.cc

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

#include <fstream>

#include "doctest.h"
#include "oracles.h"
#include "spkidx/error.h"
#include "spkidx/features.h"

using namespace spkidx;

namespace {

AudioBuffer Noise(uint64_t seed, size_t n, double amp = 3000.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, amp);
  AudioBuffer buf;
  buf.samples.resize(n);
  for (auto &s : buf.samples)
    s = static_cast<int16_t>(std::clamp(std::lround(g(rng)), -32768L, 32767L));
  return buf;
}

void CheckAgainstOracle(const AudioBuffer &buf, const FeatureConfig &cfg) {
  const FeatureMatrix fm = ExtractFeatures(buf, cfg);
  const Eigen::MatrixXd ref =
      oracle::NaiveMfcc(buf.samples, kSampleRate, cfg.window_samples(),
                        cfg.hop_samples(), cfg.n_mfcc, cfg.n_mel_filters,
                        cfg.preemphasis);
  REQUIRE(fm.num_frames() == ref.rows());
  double worst = 0.0;
  for (Eigen::Index t = 0; t < ref.rows(); ++t)
    for (Eigen::Index j = 0; j < ref.cols(); ++j) {
      const double tol = 1e-4 + 1e-5 * std::abs(ref(t, j));
      worst = std::max(worst, std::abs(fm.frames(t, j) - ref(t, j)) / tol);
    }
  CHECK(worst <= 1.0);
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

TEST_CASE("one second gives 98 frames") {
  FeatureConfig cfg;
  CHECK(NumFrames(16000, 400, 160) == 98);
  const FeatureMatrix fm = ExtractFeatures(Noise(1, 16000), cfg);
  CHECK(fm.num_frames() == 98);
  CHECK(fm.dim() == 26);
}

TEST_CASE("frame count matches enumeration of window starts") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t window = 1 + rng() % 800;
    const size_t hop = 1 + rng() % 400;
    const size_t samples = rng() % 5000;
    CHECK(NumFrames(samples, window, hop) ==
          oracle::EnumerateFrames(samples, window, hop));
  }
}

TEST_CASE("mfcc matches a naive DFT implementation") {
  FeatureConfig cfg;
  cfg.include_delta = false;
  CheckAgainstOracle(Noise(5, 6000), cfg);
  cfg.n_mfcc = 19;
  cfg.n_mel_filters = 40;
  cfg.preemphasis = 0.0;
  CheckAgainstOracle(Noise(6, 4000, 200.0), cfg);
}

TEST_CASE("all-zero signal sits on the log floor") {
  FeatureConfig cfg;
  AudioBuffer buf;
  buf.samples.assign(8000, 0);
  const FeatureMatrix fm = ExtractFeatures(buf, cfg);
  REQUIRE(fm.num_frames() > 1);
  for (Eigen::Index t = 0; t < fm.num_frames(); ++t) {
    CHECK(fm.frames(t, cfg.n_mfcc) == static_cast<float>(kLogFloor));
    CHECK((fm.frames.row(t) - fm.frames.row(0)).cwiseAbs().maxCoeff() == 0.0f);
    // A flat log-mel vector has no energy in c1.. of an orthonormal DCT.
    CHECK(fm.frames.row(t).head(cfg.n_mfcc).cwiseAbs().maxCoeff() < 1e-5f);
  }
}

TEST_CASE("dc signal: stationary frames that match the oracle") {
  FeatureConfig cfg;
  cfg.include_delta = false;
  AudioBuffer buf;
  buf.samples.assign(4000, 1000);
  CheckAgainstOracle(buf, cfg);
  const FeatureMatrix fm = ExtractFeatures(buf, cfg);
  // Only frame 0 contains the un-filtered first sample.
  for (Eigen::Index t = 2; t < fm.num_frames(); ++t)
    CHECK((fm.frames.row(t) - fm.frames.row(1)).cwiseAbs().maxCoeff() < 1e-4f);
}

TEST_CASE("feature layout and determinism") {
  FeatureConfig cfg;
  cfg.include_delta_delta = true;
  const AudioBuffer buf = Noise(9, 8000);
  const FeatureMatrix a = ExtractFeatures(buf, cfg, 4);
  const FeatureMatrix b = ExtractFeatures(buf, cfg, 4);
  CHECK(a.segment_id == 4);
  CHECK(a.dim() == 39);
  CHECK(a.frames == b.frames);
  const Eigen::MatrixXd base = a.frames.leftCols(13).cast<double>();
  const Eigen::MatrixXd delta = ComputeDeltas(base);
  CHECK((a.frames.middleCols(13, 13).cast<double>() - delta).cwiseAbs().maxCoeff() <
        1e-3);
}

TEST_CASE("short and empty buffers") {
  FeatureConfig cfg;
  AudioBuffer shorter = Noise(2, 399);
  const FeatureMatrix fm = ExtractFeatures(shorter, cfg);
  CHECK(fm.num_frames() == 0);
  CHECK(fm.dim() == cfg.dim());
  CHECK(ExtractFeatures(Noise(2, 400), cfg).num_frames() == 1);
  CHECK(KindOf([&] { ExtractFeatures(AudioBuffer{}, cfg); }) ==
        ErrorKind::kEmptySegment);
}

TEST_CASE("deltas") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(10, 3, 4.5);
  CHECK(ComputeDeltas(constant).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd ramp(12, 2);
  for (int t = 0; t < 12; ++t) {
    ramp(t, 0) = 0.75 * t;
    ramp(t, 1) = -2.0 * t + 1.0;
  }
  const Eigen::MatrixXd d = ComputeDeltas(ramp);
  for (int t = 2; t < 10; ++t) {
    CHECK(d(t, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(d(t, 1) == doctest::Approx(-2.0).epsilon(1e-12));
  }

  CHECK(ComputeDeltas(Eigen::MatrixXd::Constant(1, 4, 3.0)).isZero(0.0));

  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = oracle::RandomFrames(rng, 20, 3).cast<double>();
  const Eigen::MatrixXd y = oracle::RandomFrames(rng, 20, 3).cast<double>();
  const Eigen::MatrixXd lin = ComputeDeltas(2.0 * x + y) -
                              (2.0 * ComputeDeltas(x) + ComputeDeltas(y));
  CHECK(lin.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("feature file round trip and corruption") {
  oracle::TempDir dir("fea");
  std::mt19937_64 rng(8);
  FeatureMatrix fm;
  fm.frames = oracle::RandomFrames(rng, 17, 5);
  WriteFeatures(dir.path() / "12.fea", fm);
  const FeatureMatrix back = ReadFeatures(dir.path() / "12.fea");
  CHECK(back.frames == fm.frames);
  CHECK(back.segment_id == 12);

  std::ofstream(dir.path() / "bad.fea", std::ios::binary) << "FEA2xxxxxxxxxxxx";
  CHECK(KindOf([&] { ReadFeatures(dir.path() / "bad.fea"); }) ==
        ErrorKind::kBadMagic);

  const auto size = std::filesystem::file_size(dir.path() / "12.fea");
  std::filesystem::resize_file(dir.path() / "12.fea", size - 3);
  CHECK(KindOf([&] { ReadFeatures(dir.path() / "12.fea"); }) ==
        ErrorKind::kDimensionMismatch);
  CHECK(KindOf([&] { ReadFeatures(dir.path() / "none.fea"); }) == ErrorKind::kIo);
}
