// spkidx/synth.h

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

#ifndef SPKIDX_SYNTH_H_
#define SPKIDX_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spkidx/audio_io.h"
#include "spkidx/features.h"

namespace spkidx {

/// Synthetic speakers: each one is a Gaussian with a random SPD covariance
/// (trace/d = 1, so the within-speaker deviation is about 1 per
/// coordinate) and a mean whose coordinates are N(0, spread^2).
struct SynthSpec {
  int n_speakers = 4;
  int segments_per_speaker = 10;
  int min_frames = 200;
  int max_frames = 400;
  int dim = 13;
  double spread = 10.0;
  uint64_t seed = 0;

  void Validate() const;
};

struct SynthCorpus {
  // Ids 0..n-1 in "temporal" order, speakers interleaved at random.
  std::vector<FeatureMatrix> segments;
  // Same ids; consecutive spans at 10 ms per frame, labelled spkNN.
  std::vector<SegmentSpan> reference;
};

SynthCorpus GenerateSynthetic(const SynthSpec &spec);

/// Writes <id>.fea per segment and reference.txt (segment list format).
void WriteSynthetic(const SynthCorpus &corpus,
                    const std::filesystem::path &out_dir);

}  // namespace spkidx

#endif  // SPKIDX_SYNTH_H_
