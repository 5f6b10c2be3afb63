// src/gaussian_stats.cc

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

#include "spkidx/gaussian_stats.h"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "spkidx/error.h"

namespace spkidx {

SegmentStats SegmentStats::Zero(Eigen::Index dim) {
  SegmentStats s;
  s.sum = Eigen::VectorXd::Zero(dim);
  s.scatter = Eigen::MatrixXd::Zero(dim, dim);
  return s;
}

Eigen::VectorXd SegmentStats::Mean() const {
  if (n == 0) throw Error(ErrorKind::kEmptySegment, "mean of empty stats");
  return sum / static_cast<double>(n);
}

Eigen::MatrixXd SegmentStats::Covariance() const {
  const Eigen::VectorXd mu = Mean();
  Eigen::MatrixXd cov = scatter / static_cast<double>(n);
  cov.noalias() -= mu * mu.transpose();
  return cov;
}

SegmentStats Accumulate(const Eigen::Ref<const FrameMatrix> &frames) {
  if (frames.rows() == 0)
    throw Error(ErrorKind::kEmptySegment, "cannot accumulate zero frames");
  if (!frames.allFinite())
    throw Error(ErrorKind::kInvalidArgument, "non-finite frame values");
  const Eigen::MatrixXd x = frames.cast<double>();
  SegmentStats s = SegmentStats::Zero(x.cols());
  s.n = x.rows();
  s.sum = x.colwise().sum().transpose();
  s.scatter.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  s.scatter.triangularView<Eigen::StrictlyUpper>() = s.scatter.transpose();
  return s;
}

SegmentStats Merge(const SegmentStats &a, const SegmentStats &b) {
  if (a.empty() && a.dim() == 0) return b;
  if (b.empty() && b.dim() == 0) return a;
  if (a.dim() != b.dim())
    throw Error(ErrorKind::kDimensionMismatch,
                "merging stats of dimension " + std::to_string(a.dim()) +
                    " and " + std::to_string(b.dim()));
  SegmentStats m;
  m.n = a.n + b.n;
  m.sum = a.sum + b.sum;
  m.scatter = a.scatter + b.scatter;
  return m;
}

double DefaultRidge(const SegmentStats &s) {
  return 1e-6 * s.Covariance().trace() / static_cast<double>(s.dim());
}

double LogDetCov(const SegmentStats &s, double ridge) {
  Eigen::MatrixXd cov = s.Covariance();
  cov.diagonal().array() += ridge;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::kNotPosDef,
                "covariance of " + std::to_string(s.n) +
                    " frames is not positive definite (ridge " +
                    std::to_string(ridge) + ")");
  const auto diag = llt.matrixLLT().diagonal().array();
  if ((diag <= 0.0).any())
    throw Error(ErrorKind::kNotPosDef, "zero pivot in Cholesky factor");
  return 2.0 * diag.log().sum();
}

}  // namespace spkidx
