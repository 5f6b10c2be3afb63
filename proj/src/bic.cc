// src/bic.cc

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

#include "spkidx/bic.h"

#include <cmath>
#include <string>

#include "spkidx/error.h"

namespace spkidx {

namespace {

void CheckPair(const SegmentStats &a, const SegmentStats &b) {
  if (a.empty() || b.empty())
    throw Error(ErrorKind::kEmptySegment, "dBIC needs non-empty statistics");
  if (a.dim() != b.dim())
    throw Error(ErrorKind::kDimensionMismatch,
                "dBIC between dimensions " + std::to_string(a.dim()) +
                    " and " + std::to_string(b.dim()));
}

}  // namespace

void BicParams::Validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::kInvalidArgument,
                "lambda must be positive, got " + std::to_string(lambda));
  if (dim < 1) throw Error(ErrorKind::kInvalidArgument, "dim must be >= 1");
}

double Penalty(int dim, int64_t n_total) {
  if (dim < 1) throw Error(ErrorKind::kInvalidArgument, "penalty needs d >= 1");
  if (n_total < 2)
    throw Error(ErrorKind::kInvalidArgument,
                "penalty needs at least 2 frames, got " +
                    std::to_string(n_total));
  const double d = dim;
  return 0.5 * (d + 0.5 * d * (d + 1.0)) *
         std::log(static_cast<double>(n_total));
}

double HalfNLogDet(const SegmentStats &s) {
  return 0.5 * static_cast<double>(s.n) * LogDetCov(s);
}

double DeltaBicFromTerms(double term_a, double term_b,
                         const SegmentStats &merged, const BicParams &params) {
  params.Validate();
  if (merged.dim() != params.dim)
    throw Error(ErrorKind::kDimensionMismatch,
                "stats dimension " + std::to_string(merged.dim()) +
                    " != params.dim " + std::to_string(params.dim));
  return (term_a + term_b) - HalfNLogDet(merged) +
         params.lambda * Penalty(params.dim, merged.n);
}

double DeltaBic(const SegmentStats &a, const SegmentStats &b,
                const BicParams &params) {
  CheckPair(a, b);
  return DeltaBicFromTerms(HalfNLogDet(a), HalfNLogDet(b), Merge(a, b),
                           params);
}

double CriticalLambda(const SegmentStats &a, const SegmentStats &b) {
  CheckPair(a, b);
  const SegmentStats merged = Merge(a, b);
  return (HalfNLogDet(merged) - (HalfNLogDet(a) + HalfNLogDet(b))) /
         Penalty(static_cast<int>(a.dim()), merged.n);
}

}  // namespace spkidx
