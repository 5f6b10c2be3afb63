// src/threshold.cc

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

#include "spkidx/threshold.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "spkidx/bic.h"
#include "spkidx/error.h"
#include "spkidx/parallel.h"

namespace spkidx {

double SegmentLambdaBound(const SegmentStats &full, const SegmentStats &left,
                          const SegmentStats &right) {
  if (full.n != left.n + right.n)
    throw Error(ErrorKind::kInvalidArgument,
                "halves hold " + std::to_string(left.n + right.n) +
                    " frames, segment holds " + std::to_string(full.n));
  const Eigen::Index d = full.dim();
  if (left.n < d + 1 || right.n < d + 1)
    throw Error(ErrorKind::kHalfTooShort,
                "halves of " + std::to_string(left.n) + " and " +
                    std::to_string(right.n) + " frames need at least " +
                    std::to_string(d + 1) + " each");
  const double numerator =
      HalfNLogDet(full) - HalfNLogDet(left) - HalfNLogDet(right);
  return numerator / Penalty(static_cast<int>(d), full.n);
}

double SegmentLambdaBound(const FeatureMatrix &segment) {
  const Eigen::Index t = segment.num_frames();
  const Eigen::Index half = t / 2;
  const Eigen::Index d = segment.dim();
  if (half < d + 1 || t - half < d + 1)
    throw Error(ErrorKind::kHalfTooShort,
                "segment " + std::to_string(segment.segment_id) + " has " +
                    std::to_string(t) + " frames");
  return SegmentLambdaBound(Accumulate(segment.frames),
                            Accumulate(segment.frames.topRows(half)),
                            Accumulate(segment.frames.bottomRows(t - half)));
}

ThresholdEstimate SummarizeBounds(std::vector<double> bounds,
                                  const ThresholdOptions &options) {
  ThresholdEstimate est;
  est.alpha = options.alpha;
  est.beta = options.beta;
  est.per_segment_lambda = bounds;
  // Sorted fold: the result does not depend on segment order.
  std::sort(bounds.begin(), bounds.end());
  if (options.trim_top && bounds.size() >= 2) {
    const auto drop = static_cast<size_t>(std::floor(0.05 * bounds.size()));
    bounds.resize(bounds.size() - drop);
  }
  if (bounds.size() < 2)
    throw Error(ErrorKind::kTooFewUsableSegments,
                std::to_string(bounds.size()) +
                    " usable segments; lambda estimation needs at least 2");
  // Shifted by the smallest bound, so equal bounds give their value and a
  // zero spread exactly.
  const double shift = bounds.front();
  double sum = 0.0;
  for (double b : bounds) sum += b - shift;
  est.lambda_bar = shift + sum / static_cast<double>(bounds.size());
  double ss = 0.0;
  for (double b : bounds) ss += (b - est.lambda_bar) * (b - est.lambda_bar);
  est.sigma = std::sqrt(ss / static_cast<double>(bounds.size()));
  est.lambda_act = est.alpha * est.lambda_bar + est.beta * est.sigma;
  if (!(est.lambda_act > 0.0))
    throw Error(ErrorKind::kEstimationFailed,
                "estimated lambda " + std::to_string(est.lambda_act) +
                    " is not positive");
  return est;
}

ThresholdEstimate EstimateLambda(std::span<const FeatureMatrix> segments,
                                 const ThresholdOptions &options) {
  std::vector<std::optional<double>> slots(segments.size());
  ParallelFor(segments.size(), options.threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        slots[i] = SegmentLambdaBound(segments[i]);
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::kHalfTooShort &&
            e.kind() != ErrorKind::kNotPosDef)
          throw;
      }
    }
  });
  std::vector<double> bounds;
  std::vector<int> used, skipped;
  for (size_t i = 0; i < segments.size(); ++i) {
    if (slots[i]) {
      bounds.push_back(*slots[i]);
      used.push_back(segments[i].segment_id);
    } else {
      skipped.push_back(segments[i].segment_id);
    }
  }
  ThresholdEstimate est = SummarizeBounds(std::move(bounds), options);
  est.used_segment_ids = std::move(used);
  est.skipped_segment_ids = std::move(skipped);
  return est;
}

}  // namespace spkidx
