// src/synth.cc

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

#include "spkidx/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "spkidx/error.h"

namespace spkidx {

namespace {

struct Speaker {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower Cholesky factor of the covariance
};

Eigen::MatrixXd RandomGaussianMatrix(int rows, int cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

Speaker MakeSpeaker(int dim, double spread, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> log_eig(std::log(0.5), std::log(2.0));
  Speaker s;
  s.mean = Eigen::VectorXd(dim);
  for (int j = 0; j < dim; ++j) s.mean[j] = spread * normal(rng);
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(RandomGaussianMatrix(dim, dim, rng))
          .householderQ();
  Eigen::VectorXd eig(dim);
  for (int j = 0; j < dim; ++j) eig[j] = std::exp(log_eig(rng));
  eig *= dim / eig.sum();
  const Eigen::MatrixXd cov = q * eig.asDiagonal() * q.transpose();
  s.chol = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  return s;
}

}  // namespace

void SynthSpec::Validate() const {
  if (n_speakers < 1 || segments_per_speaker < 1 || dim < 1)
    throw Error(ErrorKind::kConfig, "synthetic counts must be >= 1");
  if (min_frames < 1 || max_frames < min_frames)
    throw Error(ErrorKind::kConfig, "need 1 <= min_frames <= max_frames");
  if (!(spread > 0.0)) throw Error(ErrorKind::kConfig, "spread must be > 0");
}

SynthCorpus GenerateSynthetic(const SynthSpec &spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<Speaker> speakers;
  for (int s = 0; s < spec.n_speakers; ++s)
    speakers.push_back(MakeSpeaker(spec.dim, spec.spread, rng));

  std::vector<int> order;
  for (int s = 0; s < spec.n_speakers; ++s)
    order.insert(order.end(), spec.segments_per_speaker, s);
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_int_distribution<int> length(spec.min_frames, spec.max_frames);
  std::normal_distribution<double> normal;
  SynthCorpus corpus;
  long long frame_clock = 0;
  for (size_t id = 0; id < order.size(); ++id) {
    const Speaker &spk = speakers[order[id]];
    const int t = length(rng);
    Eigen::MatrixXd z(spec.dim, t);
    for (int c = 0; c < t; ++c)
      for (int j = 0; j < spec.dim; ++j) z(j, c) = normal(rng);
    const Eigen::MatrixXd x = (spk.chol * z).colwise() + spk.mean;

    FeatureMatrix fm;
    fm.segment_id = static_cast<int>(id);
    fm.frames = x.transpose().cast<float>();
    corpus.segments.push_back(std::move(fm));

    char label[16];
    std::snprintf(label, sizeof(label), "spk%02d", order[id]);
    SegmentSpan span;
    span.id = static_cast<int>(id);
    span.start = frame_clock / 100.0;
    frame_clock += t;
    span.end = frame_clock / 100.0;
    span.speaker = label;
    corpus.reference.push_back(std::move(span));
  }
  return corpus;
}

void WriteSynthetic(const SynthCorpus &corpus,
                    const std::filesystem::path &out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw Error(ErrorKind::kIo, "cannot create " + out_dir.string() + ": " +
                                    ec.message());
  for (const FeatureMatrix &fm : corpus.segments)
    WriteFeatures(out_dir / (std::to_string(fm.segment_id) + ".fea"), fm);
  WriteSegments(out_dir / "reference.txt", corpus.reference);
}

}  // namespace spkidx
