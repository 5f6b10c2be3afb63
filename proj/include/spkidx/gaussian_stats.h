// spkidx/gaussian_stats.h

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

#ifndef SPKIDX_GAUSSIAN_STATS_H_
#define SPKIDX_GAUSSIAN_STATS_H_

#include <cstdint>

#include <Eigen/Core>

#include "spkidx/features.h"

namespace spkidx {

/// Full-covariance Gaussian sufficient statistics: frame count, sum of
/// frames and sum of outer products, all in double precision. Two bundles
/// merge by fieldwise addition, so a cluster's statistics never need the
/// member frames again.
struct SegmentStats {
  int64_t n = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd scatter;

  /// Zero statistics of the given dimension.
  static SegmentStats Zero(Eigen::Index dim);

  Eigen::Index dim() const { return sum.size(); }
  bool empty() const { return n == 0; }
  Eigen::VectorXd Mean() const;
  /// Maximum-likelihood covariance scatter/n - mean*mean^T.
  Eigen::MatrixXd Covariance() const;

  bool operator==(const SegmentStats &o) const {
    return n == o.n && sum == o.sum && scatter == o.scatter;
  }
};

/// Throws kEmptySegment for zero rows and kInvalidArgument for non-finite
/// input.
SegmentStats Accumulate(const Eigen::Ref<const FrameMatrix> &frames);
inline SegmentStats Accumulate(const FeatureMatrix &fm) {
  return Accumulate(fm.frames);
}

/// Fieldwise sum. An empty operand (n == 0) is the identity regardless of
/// its dimension; otherwise dimensions must agree (kDimensionMismatch).
SegmentStats Merge(const SegmentStats &a, const SegmentStats &b);

/// 1e-6 * trace(cov) / d: keeps rank-deficient (n <= d) segments usable.
double DefaultRidge(const SegmentStats &s);

/// log|cov + ridge*I| from a Cholesky factorization. Throws kNotPosDef when
/// the regularized matrix is still not positive definite, kEmptySegment when
/// n == 0.
double LogDetCov(const SegmentStats &s, double ridge);
inline double LogDetCov(const SegmentStats &s) {
  return LogDetCov(s, DefaultRidge(s));
}

}  // namespace spkidx

#endif  // SPKIDX_GAUSSIAN_STATS_H_
