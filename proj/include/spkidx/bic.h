// spkidx/bic.h

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

#ifndef SPKIDX_BIC_H_
#define SPKIDX_BIC_H_

#include <cstdint>

#include "spkidx/gaussian_stats.h"

namespace spkidx {

// Pairwise Delta-BIC between single full-covariance Gaussians:
//
//   dBIC = 0.5 n_i log|S_i| + 0.5 n_j log|S_j| - 0.5 n_ij log|S_ij| + lambda P
//   P    = 0.5 (d + 0.5 d (d + 1)) log(n_i + n_j)
//
// A positive value means the two segments are statistically similar and
// should be merged. The generic likelihood form of BIC is not exposed: the
// clustering path only ever compares two Gaussians, for which the expression
// above is closed form. Natural logarithms throughout.

struct BicParams {
  double lambda = 1.0;
  int dim = 0;

  /// Throws kInvalidArgument unless lambda > 0 and dim >= 1.
  void Validate() const;
};

/// 0.5 * (d + 0.5 d (d+1)) * ln(n_total). Requires d >= 1, n_total >= 2.
double Penalty(int dim, int64_t n_total);

/// 0.5 * n * log|cov| with the default ridge; the per-model term of dBIC.
double HalfNLogDet(const SegmentStats &s);

double DeltaBic(const SegmentStats &a, const SegmentStats &b,
                const BicParams &params);

/// Same value as DeltaBic when term_a/term_b come from HalfNLogDet and
/// `merged` is Merge(a, b); lets callers reuse per-cluster terms.
double DeltaBicFromTerms(double term_a, double term_b,
                         const SegmentStats &merged, const BicParams &params);

/// The lambda at which dBIC(a, b) crosses zero:
/// (0.5 n_ij log|S_ij| - 0.5 n_i log|S_i| - 0.5 n_j log|S_j|) / P.
double CriticalLambda(const SegmentStats &a, const SegmentStats &b);

}  // namespace spkidx

#endif  // SPKIDX_BIC_H_
