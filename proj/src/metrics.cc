// src/metrics.cc

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

#include "spkidx/metrics.h"

#include <algorithm>
#include <set>

#include "spkidx/error.h"

namespace spkidx {

namespace {

template <typename A, typename B>
bool SameKeys(const A &a, const B &b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [](const auto &x, const auto &y) { return x.first == y.first; });
}

size_t IndexOf(const auto &sorted, const auto &value) {
  return static_cast<size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

}  // namespace

ConfusionTable BuildConfusion(const Assignment &assignment,
                              const Reference &reference,
                              const SegmentMasses &masses) {
  if (assignment.empty())
    throw Error(ErrorKind::kInvalidArgument, "nothing to score");
  if (!SameKeys(assignment, reference) || !SameKeys(assignment, masses))
    throw Error(ErrorKind::kKeyMismatch,
                "assignment, reference and masses cover different segments");

  std::set<int> clusters;
  std::set<std::string> speakers;
  for (const auto &[seg, cluster] : assignment) clusters.insert(cluster);
  for (const auto &[seg, speaker] : reference) speakers.insert(speaker);

  ConfusionTable t;
  t.clusters.assign(clusters.begin(), clusters.end());
  t.speakers.assign(speakers.begin(), speakers.end());
  t.mass = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.clusters.size()),
                                 static_cast<Eigen::Index>(t.speakers.size()));
  for (const auto &[seg, cluster] : assignment) {
    const double m = masses.at(seg);
    if (!(m > 0.0))
      throw Error(ErrorKind::kInvalidArgument,
                  "segment " + std::to_string(seg) + " has non-positive mass");
    t.mass(static_cast<Eigen::Index>(IndexOf(t.clusters, cluster)),
           static_cast<Eigen::Index>(IndexOf(t.speakers, reference.at(seg)))) += m;
  }
  return t;
}

PurityScores PurityFromConfusion(const ConfusionTable &table) {
  const double total = table.mass.sum();
  if (!(total > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "empty confusion table");
  return {table.mass.rowwise().maxCoeff().sum() / total,
          table.mass.colwise().maxCoeff().sum() / total};
}

PurityScores Purity(const Assignment &assignment, const Reference &reference,
                    const SegmentMasses &masses) {
  return PurityFromConfusion(BuildConfusion(assignment, reference, masses));
}

PurityScores PuritySegmentLevel(const Assignment &assignment,
                                const Reference &reference) {
  SegmentMasses ones;
  for (const auto &[seg, cluster] : assignment) ones[seg] = 1.0;
  return Purity(assignment, reference, ones);
}

PurityScores PurityFrameLevel(const Assignment &assignment,
                              const Reference &reference,
                              const std::map<int, int64_t> &frames) {
  SegmentMasses masses;
  for (const auto &[seg, n] : frames) masses[seg] = static_cast<double>(n);
  return Purity(assignment, reference, masses);
}

PurityReport Evaluate(const Assignment &assignment,
                      const std::map<int, std::optional<std::string>> &reference,
                      const std::map<int, int64_t> &frames) {
  PurityReport report;
  Assignment scored;
  Reference labels;
  SegmentMasses segment_mass, frame_mass;
  for (const auto &[seg, speaker] : reference) {
    if (!speaker) {
      report.unlabeled_ids.push_back(seg);
      continue;
    }
    const auto a = assignment.find(seg);
    const auto f = frames.find(seg);
    if (a == assignment.end() || f == frames.end())
      throw Error(ErrorKind::kKeyMismatch,
                  "reference segment " + std::to_string(seg) +
                      " has no assignment or frame count");
    scored[seg] = a->second;
    labels[seg] = *speaker;
    segment_mass[seg] = 1.0;
    frame_mass[seg] = static_cast<double>(f->second);
  }
  for (const auto &[seg, cluster] : assignment)
    if (!reference.contains(seg))
      throw Error(ErrorKind::kKeyMismatch,
                  "assigned segment " + std::to_string(seg) +
                      " missing from the reference");

  const PurityScores seg = Purity(scored, labels, segment_mass);
  report.confusion = BuildConfusion(scored, labels, frame_mass);
  const PurityScores frm = PurityFromConfusion(report.confusion);
  report.sp_segment = seg.sp;
  report.cp_segment = seg.cp;
  report.sp_frame = frm.sp;
  report.cp_frame = frm.cp;
  report.n_clusters = static_cast<int>(report.confusion.clusters.size());
  report.n_speakers = static_cast<int>(report.confusion.speakers.size());
  return report;
}

}  // namespace spkidx
