// src/features.cc

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

#include "spkidx/features.h"

#include <fftw3.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numbers>
#include <vector>

#include "spkidx/error.h"

namespace spkidx {

namespace {

// FFTW planning is not thread-safe; execution of a plan is.
std::mutex &FftwPlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(FftwPlannerMutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  double *input() { return in_; }

  // |X[k]| for k = 0..n/2.
  void Magnitude(std::vector<double> *mag) {
    fftw_execute(plan_);
    mag->resize(n_ / 2 + 1);
    for (int k = 0; k <= n_ / 2; ++k)
      (*mag)[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  int n_;
  double *in_ = nullptr;
  fftw_complex *out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// n_filters x (nfft/2 + 1) triangular weights, edges evenly spaced in mel
// between 0 Hz and Nyquist.
Eigen::MatrixXd MelFilterbank(int n_filters, int nfft, int sample_rate) {
  const int n_bins = nfft / 2 + 1;
  const double mel_hi = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i)
    edges[i] = MelToHz(mel_hi * i / (n_filters + 1));
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_filters, n_bins);
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / nfft;
      if (f > lo && f <= mid)
        fb(m, k) = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        fb(m, k) = (hi - f) / (hi - mid);
    }
  }
  return fb;
}

double FlooredLog(double x) {
  return x > 0.0 ? std::max(std::log(x), kLogFloor) : kLogFloor;
}

void PutU32(std::ostream &out, uint32_t v) {
  const char b[4] = {
      static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
      static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

uint32_t GetU32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

int FeatureConfig::dim() const {
  const int base = n_mfcc + (include_energy ? 1 : 0);
  return base * (1 + (include_delta ? 1 : 0) + (include_delta_delta ? 1 : 0));
}

int FeatureConfig::window_samples(int sample_rate) const {
  return sample_rate * frame_len_ms / 1000;
}

int FeatureConfig::hop_samples(int sample_rate) const {
  return sample_rate * frame_shift_ms / 1000;
}

void FeatureConfig::Validate() const {
  if (n_mfcc < 1) throw Error(ErrorKind::kConfig, "n_mfcc must be >= 1");
  if (n_mel_filters < n_mfcc)
    throw Error(ErrorKind::kConfig, "n_mel_filters must be >= n_mfcc");
  if (frame_len_ms <= 0 || frame_shift_ms <= 0)
    throw Error(ErrorKind::kConfig, "frame length and shift must be positive");
  if (preemphasis < 0.0 || preemphasis >= 1.0)
    throw Error(ErrorKind::kConfig, "preemphasis must be in [0, 1)");
  if (delta_window < 1)
    throw Error(ErrorKind::kConfig, "delta_window must be >= 1");
}

Eigen::Index NumFrames(size_t samples, size_t window, size_t hop) {
  if (window == 0 || hop == 0 || samples < window) return 0;
  return static_cast<Eigen::Index>((samples - window) / hop + 1);
}

FeatureMatrix ExtractFeatures(const AudioBuffer &buf, const FeatureConfig &cfg,
                              int segment_id) {
  cfg.Validate();
  if (buf.samples.empty())
    throw Error(ErrorKind::kEmptySegment,
                "segment " + std::to_string(segment_id) + " has no samples");
  if (buf.channels != 1)
    throw Error(ErrorKind::kInvalidArgument, "feature extraction needs mono");

  const int window = cfg.window_samples(buf.sample_rate);
  const int hop = cfg.hop_samples(buf.sample_rate);
  const Eigen::Index n_frames = NumFrames(buf.samples.size(), window, hop);

  FeatureMatrix fm;
  fm.segment_id = segment_id;
  const int base_dim = cfg.n_mfcc + (cfg.include_energy ? 1 : 0);
  if (n_frames == 0) {
    fm.frames.resize(0, cfg.dim());
    return fm;
  }

  const size_t n = buf.samples.size();
  std::vector<double> emph(n);
  emph[0] = buf.samples[0];
  for (size_t i = 1; i < n; ++i)
    emph[i] = buf.samples[i] - cfg.preemphasis * buf.samples[i - 1];

  int nfft = static_cast<int>(std::bit_ceil(static_cast<unsigned>(window)));
  RealFft fft(nfft);
  const Eigen::MatrixXd fb =
      MelFilterbank(cfg.n_mel_filters, nfft, buf.sample_rate);
  const int n_mel = cfg.n_mel_filters;

  std::vector<double> hamming(window);
  for (int i = 0; i < window; ++i)
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window - 1));

  // Orthonormal DCT-II rows 1..n_mfcc.
  Eigen::MatrixXd dct(cfg.n_mfcc, n_mel);
  for (int i = 0; i < cfg.n_mfcc; ++i)
    for (int m = 0; m < n_mel; ++m)
      dct(i, m) = std::sqrt(2.0 / n_mel) *
                  std::cos(std::numbers::pi * (i + 1) * (m + 0.5) / n_mel);

  Eigen::MatrixXd base(n_frames, base_dim);
  std::vector<double> mag;
  Eigen::VectorXd log_mel(n_mel);
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    const size_t off = static_cast<size_t>(t) * hop;
    double *in = fft.input();
    double energy = 0.0;
    for (int i = 0; i < window; ++i) {
      const double x = buf.samples[off + i];
      energy += x * x;
      in[i] = emph[off + i] * hamming[i];
    }
    for (int i = window; i < nfft; ++i) in[i] = 0.0;
    fft.Magnitude(&mag);
    const Eigen::Map<const Eigen::VectorXd> spectrum(mag.data(),
                                                     static_cast<Eigen::Index>(mag.size()));
    const Eigen::VectorXd mel = fb * spectrum;
    for (int m = 0; m < n_mel; ++m) log_mel[m] = FlooredLog(mel[m]);
    base.row(t).head(cfg.n_mfcc) = (dct * log_mel).transpose();
    if (cfg.include_energy) base(t, cfg.n_mfcc) = FlooredLog(energy);
  }

  Eigen::MatrixXd all(n_frames, cfg.dim());
  all.leftCols(base_dim) = base;
  int col = base_dim;
  if (cfg.include_delta || cfg.include_delta_delta) {
    const Eigen::MatrixXd delta = ComputeDeltas(base, cfg.delta_window);
    if (cfg.include_delta) {
      all.middleCols(col, base_dim) = delta;
      col += base_dim;
    }
    if (cfg.include_delta_delta)
      all.middleCols(col, base_dim) = ComputeDeltas(delta, cfg.delta_window);
  }
  fm.frames = all.cast<float>();
  return fm;
}

Eigen::MatrixXd ComputeDeltas(const Eigen::MatrixXd &frames, int window) {
  if (window < 1)
    throw Error(ErrorKind::kInvalidArgument, "delta window must be >= 1");
  const Eigen::Index n = frames.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, frames.cols());
  if (n == 0) return out;
  double denom = 0.0;
  for (int k = 1; k <= window; ++k) denom += k * k;
  denom *= 2.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int k = 1; k <= window; ++k) {
      const Eigen::Index ahead = std::min<Eigen::Index>(t + k, n - 1);
      const Eigen::Index behind = std::max<Eigen::Index>(t - k, 0);
      out.row(t) += k * (frames.row(ahead) - frames.row(behind));
    }
  }
  return out / denom;
}

void WriteFeatures(const std::filesystem::path &path, const FeatureMatrix &fm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write("FEA1", 4);
  PutU32(out, static_cast<uint32_t>(fm.num_frames()));
  PutU32(out, static_cast<uint32_t>(fm.dim()));
  for (Eigen::Index t = 0; t < fm.num_frames(); ++t)
    for (Eigen::Index j = 0; j < fm.dim(); ++j)
      PutU32(out, std::bit_cast<uint32_t>(fm.frames(t, j)));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

FeatureMatrix ReadFeatures(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FEA1", 4) != 0)
    throw Error(ErrorKind::kBadMagic, path.string() + " is not a FEA1 file");
  if (bytes.size() < 12)
    throw Error(ErrorKind::kDimensionMismatch,
                path.string() + ": truncated header");
  const uint32_t rows = GetU32(&bytes[4]);
  const uint32_t cols = GetU32(&bytes[8]);
  const uint64_t expected = 12 + 4ull * rows * cols;
  if (bytes.size() != expected)
    throw Error(ErrorKind::kDimensionMismatch,
                path.string() + ": header says " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " but payload is " +
                    std::to_string(bytes.size() - 12) + " bytes");
  FeatureMatrix fm;
  fm.frames.resize(rows, cols);
  const unsigned char *p = bytes.data() + 12;
  for (uint32_t t = 0; t < rows; ++t)
    for (uint32_t j = 0; j < cols; ++j, p += 4)
      fm.frames(t, j) = std::bit_cast<float>(GetU32(p));
  if (!fm.frames.allFinite())
    throw Error(ErrorKind::kInvalidArgument,
                path.string() + ": non-finite feature values");
  const std::string stem = path.stem().string();
  int id = 0;
  auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
  if (ec == std::errc() && ptr == stem.data() + stem.size()) fm.segment_id = id;
  return fm;
}

}  // namespace spkidx
