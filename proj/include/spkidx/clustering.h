// spkidx/clustering.h

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

#ifndef SPKIDX_CLUSTERING_H_
#define SPKIDX_CLUSTERING_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spkidx/bic.h"
#include "spkidx/codebook.h"
#include "spkidx/features.h"
#include "spkidx/gaussian_stats.h"
#include "spkidx/threshold.h"

namespace spkidx {

// Agglomerative speaker clustering. Every segment starts as its own cluster,
// modelled by one full-covariance Gaussian (SegmentStats) and, in two-stage
// mode, by its normalized codeword histogram. Each iteration merges one pair.
//
// Baseline: dBIC over all current pairs, merge the best positive one.
// Two-stage: rank all pairs by histogram cosine distance, evaluate dBIC on
// the n_best closest only, merge the best if positive, otherwise stop.
//
// Cluster ids are segment ids; a merged cluster keeps the smaller id. Ties
// are broken towards the lexicographically smallest (id_a, id_b) both in the
// cosine ranking and in the dBIC argmax, which makes the two modes produce
// identical merges when n_best covers every pair.

enum class ClusterMode { kBaseline, kTwoStage };

std::string_view ClusterModeName(ClusterMode mode);
/// Accepts "baseline" / "baseline-bic" and "two-stage"; throws kConfig.
ClusterMode ParseClusterMode(std::string_view name);

struct ClusterConfig {
  ClusterMode mode = ClusterMode::kTwoStage;
  int n_best = 200;
  // Unset: estimate lambda from the segments themselves.
  std::optional<double> lambda;
  uint64_t seed = 0;
  // Unset: AutoCodebookSize.
  std::optional<int> codebook_size;
  // Pre-trained codebook for two-stage mode; skips training when set.
  std::optional<Codebook> codebook;
  ThresholdOptions threshold;
  KMeansOptions kmeans;
  int threads = 1;

  void Validate() const;
};

struct Cluster {
  int id = 0;
  std::vector<int> members;  // sorted segment ids
  SegmentStats stats;
  HistogramVec histogram;  // empty in baseline mode
  double bic_term = 0.0;   // HalfNLogDet(stats)
};

struct MergeRecord {
  int iteration = 0;
  int id_a = 0;  // surviving id, id_a < id_b
  int id_b = 0;
  int cosine_rank = -1;  // 0-based rank among the fast-match candidates
  double delta_bic = 0.0;

  bool operator==(const MergeRecord &) const = default;
};

/// Equality of the merge decision only (iteration, pair and dBIC value).
bool SameMerge(const MergeRecord &a, const MergeRecord &b);
bool SameMergeLog(std::span<const MergeRecord> a,
                  std::span<const MergeRecord> b);

struct ClusterState {
  std::vector<Cluster> clusters;  // ordered by id
  std::vector<MergeRecord> merge_log;
  int64_t cosine_evals = 0;
  int64_t bic_evals = 0;
  int iterations = 0;
  // Two-stage only: set when the run stopped although some pairs had never
  // reached the dBIC stage in the last iteration.
  bool stopped_with_unscored_pairs = false;

  double lambda = 0.0;
  std::optional<ThresholdEstimate> threshold;
  int codebook_size = 0;
  Codebook codebook;  // two-stage only
  double prepare_seconds = 0.0;  // stats, codebook, histograms, lambda
  double merge_seconds = 0.0;    // agglomerative loop only

  /// segment id -> cluster id.
  std::map<int, int> Assignment() const;
};

/// 1 - a.b / (|a| |b|). Throws kZeroVector or kDimensionMismatch.
double CosineDistance(const HistogramVec &a, const HistogramVec &b);

/// One cluster per segment with stats and dBIC term; histograms are filled
/// when a codebook is given. Throws kInvalidArgument on duplicate ids or
/// mixed dimensions, kEmptySegment on a segment without frames.
std::vector<Cluster> InitialClusters(std::span<const FeatureMatrix> segments,
                                     const Codebook *codebook);

/// The agglomerative loops on prepared clusters. `state` receives the final
/// clusters, merge log and counters; lambda is taken from `params`.
ClusterState AgglomerateBaseline(std::vector<Cluster> clusters,
                                 const BicParams &params, int threads = 1);
ClusterState AgglomerateTwoStage(std::vector<Cluster> clusters,
                                 const BicParams &params, int n_best,
                                 int threads = 1);

/// Full pipelines from segment features: lambda (given or estimated),
/// codebook and histograms (two-stage), then the merge loop.
ClusterState ClusterBaseline(std::span<const FeatureMatrix> segments,
                             const ClusterConfig &cfg);
ClusterState ClusterTwoStage(std::span<const FeatureMatrix> segments,
                             const ClusterConfig &cfg);
/// Dispatches on cfg.mode.
ClusterState RunClustering(std::span<const FeatureMatrix> segments,
                           const ClusterConfig &cfg);

}  // namespace spkidx

#endif  // SPKIDX_CLUSTERING_H_
