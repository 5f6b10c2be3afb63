// spkidx/features.h

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

#ifndef SPKIDX_FEATURES_H_
#define SPKIDX_FEATURES_H_

#include <filesystem>

#include <Eigen/Core>

#include "spkidx/audio_io.h"

namespace spkidx {

/// Frame-major storage: one row per frame.
using FrameMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureConfig {
  int frame_len_ms = 25;
  int frame_shift_ms = 10;
  int n_mfcc = 12;
  bool include_energy = true;
  bool include_delta = true;
  bool include_delta_delta = false;
  int n_mel_filters = 26;
  double preemphasis = 0.97;
  int delta_window = 2;

  /// (n_mfcc + energy) * (1 + delta + delta-delta).
  int dim() const;
  int window_samples(int sample_rate = kSampleRate) const;
  int hop_samples(int sample_rate = kSampleRate) const;
  /// Throws kConfig when a field is out of range.
  void Validate() const;
};

struct FeatureMatrix {
  FrameMatrix frames;
  int segment_id = 0;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

/// Number of full windows of length `window` at hop `hop` in `samples`
/// samples; 0 when the signal is shorter than one window.
Eigen::Index NumFrames(size_t samples, size_t window, size_t hop);

/// Log floor used for frame energy and filterbank outputs.
inline constexpr double kLogFloor = -23.025850929940457;  // log(1e-10)

/// MFCC (c1..c_n, orthonormal DCT-II of log mel energies) followed by the
/// log frame energy and the configured regression deltas.
///
/// A buffer shorter than one analysis window yields an empty matrix with the
/// configured column count; callers treat that as a warning.
FeatureMatrix ExtractFeatures(const AudioBuffer &buf, const FeatureConfig &cfg,
                              int segment_id = 0);

/// Regression deltas with half-width `window`; edge frames are replicated.
Eigen::MatrixXd ComputeDeltas(const Eigen::MatrixXd &frames, int window = 2);

/// Binary feature file: "FEA1", u32 T, u32 d, then T*d little-endian f32.
void WriteFeatures(const std::filesystem::path &path, const FeatureMatrix &fm);
/// segment_id is taken from the file stem when it is an integer.
/// Throws kBadMagic, kDimensionMismatch or kIo.
FeatureMatrix ReadFeatures(const std::filesystem::path &path);

}  // namespace spkidx

#endif  // SPKIDX_FEATURES_H_
