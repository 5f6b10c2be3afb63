// spkidx/codebook.h

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

#ifndef SPKIDX_CODEBOOK_H_
#define SPKIDX_CODEBOOK_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spkidx/features.h"

namespace spkidx {

using CentroidMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// K centroids used to vector-quantize frames. Trained with k-means, which
/// yields the same centroids a GMM would contribute as its means.
struct Codebook {
  CentroidMatrix centroids;
  uint64_t train_seed = 0;

  int size() const { return static_cast<int>(centroids.rows()); }
  Eigen::Index dim() const { return centroids.cols(); }
};

/// Normalized codeword frequencies of one segment or cluster.
struct HistogramVec {
  Eigen::VectorXd weights;
  int segment_id = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

struct KMeansOptions {
  int max_iterations = 50;
  // Stop when (prev - cur) / prev inertia falls below this.
  double tolerance = 1e-4;
  int threads = 1;
};

struct KMeansTrace {
  // Inertia after each assignment step.
  std::vector<double> inertia;
  int reseeded_clusters = 0;
};

/// K = number of segments, capped at 1024 and at one codeword per ten
/// pooled frames; never below 1.
int AutoCodebookSize(int n_segments, int64_t pooled_frames);

/// Seeded k-means++ followed by Lloyd iterations. Empty clusters are
/// re-seeded from the farthest point of the currently largest cluster.
/// Deterministic for a given seed and any thread count. Throws
/// kTooFewFrames when there are fewer (distinct) frames than K.
Codebook TrainCodebook(const Eigen::Ref<const FrameMatrix> &pooled, int k,
                       uint64_t seed, const KMeansOptions &options = {},
                       KMeansTrace *trace = nullptr);

/// Nearest centroid (Euclidean) per frame; ties go to the lowest index.
std::vector<int> Quantize(const Eigen::Ref<const FrameMatrix> &frames,
                          const Codebook &cb);

/// Counts of each codeword divided by the sequence length.
/// Throws kEmptySegment for an empty sequence, kOutOfRange for a bad index.
HistogramVec BuildHistogram(std::span<const int> indices, int k,
                            int segment_id = 0);

/// (n_a a + n_b b) / (n_a + n_b): the histogram of the concatenated
/// sequences. A zero-frame operand is the identity.
HistogramVec MergeHistograms(const HistogramVec &a, int64_t n_a,
                             const HistogramVec &b, int64_t n_b);

/// "VQCB", u32 K, u32 d, K*d little-endian f32 centroids.
void WriteCodebook(const std::filesystem::path &path, const Codebook &cb);
Codebook ReadCodebook(const std::filesystem::path &path);

}  // namespace spkidx

#endif  // SPKIDX_CODEBOOK_H_
