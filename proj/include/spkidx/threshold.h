// spkidx/threshold.h

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

#ifndef SPKIDX_THRESHOLD_H_
#define SPKIDX_THRESHOLD_H_

#include <span>
#include <vector>

#include "spkidx/features.h"
#include "spkidx/gaussian_stats.h"

namespace spkidx {

// Data-driven lambda. Every segment is assumed to hold one speaker, so the
// dBIC between its two halves ought to be positive; each segment therefore
// yields a lower bound on lambda. The working value is
//
//   lambda_act = alpha * mean(bounds) + beta * stddev(bounds)

struct ThresholdOptions {
  double alpha = 2.0;
  double beta = 0.5;
  // Drop the largest 5% of bounds before the mean and spread.
  bool trim_top = false;
  int threads = 1;
};

struct ThresholdEstimate {
  std::vector<double> per_segment_lambda;
  std::vector<int> used_segment_ids;
  std::vector<int> skipped_segment_ids;
  double lambda_bar = 0.0;
  // Population standard deviation of the bounds that entered lambda_bar.
  double sigma = 0.0;
  double lambda_act = 0.0;
  double alpha = 2.0;
  double beta = 0.5;
};

/// (0.5 n log|S| - 0.5 n1 log|S1| - 0.5 n2 log|S2|) / P(d, n).
/// Throws kHalfTooShort when either half has fewer than d + 1 frames,
/// kInvalidArgument when the halves do not add up to the whole, and
/// kNotPosDef for a degenerate covariance.
double SegmentLambdaBound(const SegmentStats &full, const SegmentStats &left,
                          const SegmentStats &right);

/// Splits `frames` at row floor(T/2) and evaluates SegmentLambdaBound.
double SegmentLambdaBound(const FeatureMatrix &segment);

/// Reduces a list of bounds to lambda_bar, sigma and lambda_act.
/// Throws kTooFewUsableSegments for fewer than two bounds and
/// kEstimationFailed when lambda_act <= 0.
ThresholdEstimate SummarizeBounds(std::vector<double> bounds,
                                  const ThresholdOptions &options);

/// Bounds for every segment; segments that are too short or degenerate are
/// skipped and listed in skipped_segment_ids.
ThresholdEstimate EstimateLambda(std::span<const FeatureMatrix> segments,
                                 const ThresholdOptions &options = {});

}  // namespace spkidx

#endif  // SPKIDX_THRESHOLD_H_
