// src/clustering.cc

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

#include "spkidx/clustering.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <tuple>

#include "spkidx/error.h"
#include "spkidx/parallel.h"

namespace spkidx {

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct SlotPair {
  int a;
  int b;
};

// Live clusters held in slots ordered by id; slot order equals id order, so
// comparing slot indices is comparing ids.
class ClusterSet {
 public:
  explicit ClusterSet(std::vector<Cluster> clusters)
      : slots_(std::move(clusters)), active_(slots_.size(), true) {
    std::sort(slots_.begin(), slots_.end(),
              [](const Cluster &x, const Cluster &y) { return x.id < y.id; });
    for (size_t i = 1; i < slots_.size(); ++i)
      if (slots_[i].id == slots_[i - 1].id)
        throw Error(ErrorKind::kInvalidArgument,
                    "duplicate cluster id " + std::to_string(slots_[i].id));
  }

  size_t num_slots() const { return slots_.size(); }
  const Cluster &slot(int i) const { return slots_[i]; }
  bool active(int i) const { return active_[i]; }

  std::vector<int> ActiveSlots() const {
    std::vector<int> out;
    for (size_t i = 0; i < slots_.size(); ++i)
      if (active_[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  // Lexicographic (a, b) order.
  std::vector<SlotPair> ActivePairs() const {
    const std::vector<int> live = ActiveSlots();
    std::vector<SlotPair> pairs;
    pairs.reserve(live.size() * (live.size() - 1) / 2);
    for (size_t i = 0; i < live.size(); ++i)
      for (size_t j = i + 1; j < live.size(); ++j)
        pairs.push_back({live[i], live[j]});
    return pairs;
  }

  double DeltaBic(const SlotPair &p, const BicParams &params) const {
    const Cluster &x = slots_[p.a];
    const Cluster &y = slots_[p.b];
    return DeltaBicFromTerms(x.bic_term, y.bic_term, Merge(x.stats, y.stats),
                             params);
  }

  void MergeInto(int a, int b) {
    Cluster &x = slots_[a];
    Cluster &y = slots_[b];
    if (x.histogram.size() > 0 && y.histogram.size() > 0)
      x.histogram = MergeHistograms(x.histogram, x.stats.n, y.histogram, y.stats.n);
    x.stats = Merge(x.stats, y.stats);
    x.bic_term = HalfNLogDet(x.stats);
    x.members.insert(x.members.end(), y.members.begin(), y.members.end());
    std::sort(x.members.begin(), x.members.end());
    active_[b] = false;
  }

  std::vector<Cluster> TakeActive() {
    std::vector<Cluster> out;
    for (size_t i = 0; i < slots_.size(); ++i)
      if (active_[i]) out.push_back(std::move(slots_[i]));
    return out;
  }

 private:
  std::vector<Cluster> slots_;
  std::vector<bool> active_;
};

// Index of the best pair: larger dBIC wins, equal values go to the smaller
// (a, b) whatever the position in `pairs`.
size_t ArgmaxDeltaBic(const std::vector<SlotPair> &pairs,
                      const std::vector<double> &values) {
  size_t best = 0;
  for (size_t i = 1; i < pairs.size(); ++i) {
    if (values[i] > values[best] ||
        (values[i] == values[best] &&
         std::tie(pairs[i].a, pairs[i].b) < std::tie(pairs[best].a, pairs[best].b)))
      best = i;
  }
  return best;
}

void CheckUniform(const std::vector<Cluster> &clusters, const BicParams &params) {
  params.Validate();
  for (const Cluster &c : clusters)
    if (c.stats.dim() != params.dim)
      throw Error(ErrorKind::kDimensionMismatch,
                  "cluster " + std::to_string(c.id) + " has dimension " +
                      std::to_string(c.stats.dim()) + ", expected " +
                      std::to_string(params.dim));
}

}  // namespace

std::string_view ClusterModeName(ClusterMode mode) {
  return mode == ClusterMode::kBaseline ? "baseline" : "two-stage";
}

ClusterMode ParseClusterMode(std::string_view name) {
  if (name == "baseline" || name == "baseline-bic") return ClusterMode::kBaseline;
  if (name == "two-stage" || name == "vq-bic") return ClusterMode::kTwoStage;
  throw Error(ErrorKind::kConfig,
              "unknown mode '" + std::string(name) +
                  "' (expected baseline or two-stage)");
}

void ClusterConfig::Validate() const {
  if (n_best < 1) throw Error(ErrorKind::kConfig, "n_best must be >= 1");
  if (lambda && !(*lambda > 0.0))
    throw Error(ErrorKind::kConfig, "lambda must be positive");
  if (codebook_size && *codebook_size < 1)
    throw Error(ErrorKind::kConfig, "codebook size must be >= 1");
  if (threads < 0) throw Error(ErrorKind::kConfig, "threads must be >= 0");
}

bool SameMerge(const MergeRecord &a, const MergeRecord &b) {
  return a.iteration == b.iteration && a.id_a == b.id_a && a.id_b == b.id_b &&
         a.delta_bic == b.delta_bic;
}

bool SameMergeLog(std::span<const MergeRecord> a,
                  std::span<const MergeRecord> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), SameMerge);
}

std::map<int, int> ClusterState::Assignment() const {
  std::map<int, int> out;
  for (const Cluster &c : clusters)
    for (int m : c.members) out[m] = c.id;
  return out;
}

double CosineDistance(const HistogramVec &a, const HistogramVec &b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kDimensionMismatch,
                "histograms of size " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  const double aa = a.weights.squaredNorm();
  const double bb = b.weights.squaredNorm();
  if (!(aa > 0.0) || !(bb > 0.0))
    throw Error(ErrorKind::kZeroVector, "cosine distance of a zero histogram");
  const double cos = a.weights.dot(b.weights) / std::sqrt(aa * bb);
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

std::vector<Cluster> InitialClusters(std::span<const FeatureMatrix> segments,
                                     const Codebook *codebook) {
  std::set<int> ids;
  for (const FeatureMatrix &s : segments) {
    if (!ids.insert(s.segment_id).second)
      throw Error(ErrorKind::kInvalidArgument,
                  "duplicate segment id " + std::to_string(s.segment_id));
    if (s.dim() != segments.front().dim())
      throw Error(ErrorKind::kInvalidArgument,
                  "segment " + std::to_string(s.segment_id) +
                      " has a different feature dimension");
  }
  std::vector<Cluster> clusters(segments.size());
  for (size_t i = 0; i < segments.size(); ++i) {
    const FeatureMatrix &s = segments[i];
    Cluster &c = clusters[i];
    c.id = s.segment_id;
    c.members = {s.segment_id};
    c.stats = Accumulate(s.frames);
    c.bic_term = HalfNLogDet(c.stats);
    if (codebook)
      c.histogram = BuildHistogram(Quantize(s.frames, *codebook),
                                   codebook->size(), s.segment_id);
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster &x, const Cluster &y) { return x.id < y.id; });
  return clusters;
}

ClusterState AgglomerateBaseline(std::vector<Cluster> clusters,
                                 const BicParams &params, int threads) {
  CheckUniform(clusters, params);
  const auto start = Clock::now();
  ClusterSet set(std::move(clusters));
  ClusterState state;
  state.lambda = params.lambda;

  for (int iter = 0;; ++iter) {
    const std::vector<SlotPair> pairs = set.ActivePairs();
    if (pairs.empty()) break;
    state.iterations = iter + 1;
    std::vector<double> values(pairs.size());
    ParallelFor(pairs.size(), threads, [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) values[i] = set.DeltaBic(pairs[i], params);
    });
    state.bic_evals += static_cast<int64_t>(pairs.size());
    const size_t best = ArgmaxDeltaBic(pairs, values);
    if (!(values[best] > 0.0)) break;
    const SlotPair p = pairs[best];
    state.merge_log.push_back(
        {iter, set.slot(p.a).id, set.slot(p.b).id, -1, values[best]});
    set.MergeInto(p.a, p.b);
  }
  state.clusters = set.TakeActive();
  state.merge_seconds = SecondsSince(start);
  return state;
}

ClusterState AgglomerateTwoStage(std::vector<Cluster> clusters,
                                 const BicParams &params, int n_best,
                                 int threads) {
  if (n_best < 1) throw Error(ErrorKind::kInvalidArgument, "n_best must be >= 1");
  CheckUniform(clusters, params);
  for (const Cluster &c : clusters)
    if (c.histogram.size() == 0)
      throw Error(ErrorKind::kInvalidArgument,
                  "cluster " + std::to_string(c.id) + " has no histogram");
  const auto start = Clock::now();
  ClusterSet set(std::move(clusters));
  ClusterState state;
  state.lambda = params.lambda;

  // Cosine distances between live clusters, cached until either side merges.
  const size_t n = set.num_slots();
  const double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> cosine(n);
  for (size_t i = 0; i < n; ++i) cosine[i].assign(n - i - 1, kUnset);
  auto cached = [&](const SlotPair &p) -> double & {
    return cosine[p.a][p.b - p.a - 1];
  };

  struct Candidate {
    double cosine;
    SlotPair pair;
  };
  auto closer = [](const Candidate &x, const Candidate &y) {
    return std::tie(x.cosine, x.pair.a, x.pair.b) <
           std::tie(y.cosine, y.pair.a, y.pair.b);
  };

  for (int iter = 0;; ++iter) {
    const std::vector<SlotPair> pairs = set.ActivePairs();
    if (pairs.empty()) break;
    state.iterations = iter + 1;

    std::vector<SlotPair> missing;
    for (const SlotPair &p : pairs)
      if (std::isnan(cached(p))) missing.push_back(p);
    ParallelFor(missing.size(), threads, [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i)
        cached(missing[i]) = CosineDistance(set.slot(missing[i].a).histogram,
                                            set.slot(missing[i].b).histogram);
    });
    state.cosine_evals += static_cast<int64_t>(missing.size());

    std::vector<Candidate> ranked(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) ranked[i] = {cached(pairs[i]), pairs[i]};
    const size_t m = std::min(pairs.size(), static_cast<size_t>(n_best));
    if (m < ranked.size())
      std::nth_element(ranked.begin(), ranked.begin() + m, ranked.end(), closer);
    ranked.resize(m);
    std::sort(ranked.begin(), ranked.end(), closer);

    std::vector<SlotPair> shortlist(m);
    for (size_t i = 0; i < m; ++i) shortlist[i] = ranked[i].pair;
    std::vector<double> values(m);
    ParallelFor(m, threads, [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i)
        values[i] = set.DeltaBic(shortlist[i], params);
    });
    state.bic_evals += static_cast<int64_t>(m);

    const size_t best = ArgmaxDeltaBic(shortlist, values);
    if (!(values[best] > 0.0)) {
      state.stopped_with_unscored_pairs = m < pairs.size();
      break;
    }
    const SlotPair p = shortlist[best];
    state.merge_log.push_back({iter, set.slot(p.a).id, set.slot(p.b).id,
                               static_cast<int>(best), values[best]});
    set.MergeInto(p.a, p.b);
    for (int j = 0; j < p.a; ++j) cosine[j][p.a - j - 1] = kUnset;
    std::fill(cosine[p.a].begin(), cosine[p.a].end(), kUnset);
  }
  state.clusters = set.TakeActive();
  state.merge_seconds = SecondsSince(start);
  return state;
}

namespace {

double ResolveLambda(std::span<const FeatureMatrix> segments,
                     const ClusterConfig &cfg,
                     std::optional<ThresholdEstimate> *estimate) {
  if (cfg.lambda) return *cfg.lambda;
  ThresholdOptions opts = cfg.threshold;
  opts.threads = cfg.threads;
  *estimate = EstimateLambda(segments, opts);
  return (*estimate)->lambda_act;
}

void CheckSegments(std::span<const FeatureMatrix> segments) {
  if (segments.empty())
    throw Error(ErrorKind::kInvalidArgument, "no segments to cluster");
}

}  // namespace

ClusterState ClusterBaseline(std::span<const FeatureMatrix> segments,
                             const ClusterConfig &cfg) {
  cfg.Validate();
  CheckSegments(segments);
  const auto start = Clock::now();
  std::optional<ThresholdEstimate> estimate;
  std::vector<Cluster> clusters = InitialClusters(segments, nullptr);
  const BicParams params{
      segments.size() >= 2 ? ResolveLambda(segments, cfg, &estimate)
                           : cfg.lambda.value_or(1.0),
      static_cast<int>(segments.front().dim())};
  const double prepare = SecondsSince(start);
  ClusterState state = AgglomerateBaseline(std::move(clusters), params, cfg.threads);
  state.threshold = std::move(estimate);
  state.prepare_seconds = prepare;
  return state;
}

ClusterState ClusterTwoStage(std::span<const FeatureMatrix> segments,
                             const ClusterConfig &cfg) {
  cfg.Validate();
  CheckSegments(segments);
  const auto start = Clock::now();
  std::optional<ThresholdEstimate> estimate;
  const double lambda = segments.size() >= 2
                            ? ResolveLambda(segments, cfg, &estimate)
                            : cfg.lambda.value_or(1.0);

  Eigen::Index total = 0;
  for (const FeatureMatrix &s : segments) total += s.num_frames();
  FrameMatrix pooled(total, segments.front().dim());
  Eigen::Index row = 0;
  for (const FeatureMatrix &s : segments) {
    if (s.dim() != pooled.cols())
      throw Error(ErrorKind::kInvalidArgument,
                  "segment " + std::to_string(s.segment_id) +
                      " has a different feature dimension");
    pooled.middleRows(row, s.num_frames()) = s.frames;
    row += s.num_frames();
  }
  Codebook codebook;
  if (cfg.codebook) {
    codebook = *cfg.codebook;
    if (codebook.dim() != pooled.cols())
      throw Error(ErrorKind::kDimensionMismatch,
                  "codebook dimension " + std::to_string(codebook.dim()) +
                      " vs features " + std::to_string(pooled.cols()));
  } else {
    const int k = cfg.codebook_size.value_or(
        AutoCodebookSize(static_cast<int>(segments.size()), total));
    KMeansOptions kmeans = cfg.kmeans;
    kmeans.threads = cfg.threads;
    codebook = TrainCodebook(pooled, k, cfg.seed, kmeans);
    // Round to storage precision so a codebook read back from a VQCB file
    // reproduces this run exactly.
    codebook.centroids = codebook.centroids.cast<float>().cast<double>();
  }
  std::vector<Cluster> clusters = InitialClusters(segments, &codebook);
  const BicParams params{lambda, static_cast<int>(pooled.cols())};
  const double prepare = SecondsSince(start);

  ClusterState state =
      AgglomerateTwoStage(std::move(clusters), params, cfg.n_best, cfg.threads);
  state.threshold = std::move(estimate);
  state.codebook_size = codebook.size();
  state.codebook = std::move(codebook);
  state.prepare_seconds = prepare;
  return state;
}

ClusterState RunClustering(std::span<const FeatureMatrix> segments,
                           const ClusterConfig &cfg) {
  return cfg.mode == ClusterMode::kBaseline ? ClusterBaseline(segments, cfg)
                                            : ClusterTwoStage(segments, cfg);
}

}  // namespace spkidx
