// spkidx/metrics.h

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

#ifndef SPKIDX_METRICS_H_
#define SPKIDX_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace spkidx {

// Purity of a clustering against reference speakers, with w(c, s) the total
// mass of segments placed in cluster c whose reference speaker is s:
//
//   cluster purity  cp = sum_c max_s w(c, s) / sum w
//   speaker purity  sp = sum_s max_c w(c, s) / sum w
//
// Segment level uses unit masses, frame level uses frame counts.

using Assignment = std::map<int, int>;               // segment -> cluster
using Reference = std::map<int, std::string>;        // segment -> speaker
using SegmentMasses = std::map<int, double>;         // segment -> mass

struct PurityScores {
  double cp = 0.0;
  double sp = 0.0;
};

struct ConfusionTable {
  std::vector<int> clusters;          // row labels, ascending
  std::vector<std::string> speakers;  // column labels, ascending
  Eigen::MatrixXd mass;               // clusters x speakers
};

/// Throws kKeyMismatch when the three maps do not share one key set,
/// kInvalidArgument for an empty input or a non-positive mass.
ConfusionTable BuildConfusion(const Assignment &assignment,
                              const Reference &reference,
                              const SegmentMasses &masses);

PurityScores PurityFromConfusion(const ConfusionTable &table);

PurityScores Purity(const Assignment &assignment, const Reference &reference,
                    const SegmentMasses &masses);
PurityScores PuritySegmentLevel(const Assignment &assignment,
                                const Reference &reference);
PurityScores PurityFrameLevel(const Assignment &assignment,
                              const Reference &reference,
                              const std::map<int, int64_t> &frames);

struct PurityReport {
  double sp_segment = 0.0;
  double cp_segment = 0.0;
  double sp_frame = 0.0;
  double cp_frame = 0.0;
  int n_clusters = 0;
  int n_speakers = 0;
  ConfusionTable confusion;        // frame masses
  std::vector<int> unlabeled_ids;  // excluded from scoring
};

/// Segment- and frame-level purity. Reference segments without a speaker
/// label are excluded (and listed); every scored segment needs an
/// assignment and a frame count.
PurityReport Evaluate(const Assignment &assignment,
                      const std::map<int, std::optional<std::string>> &reference,
                      const std::map<int, int64_t> &frames);

}  // namespace spkidx

#endif  // SPKIDX_METRICS_H_
