// src/codebook.cc

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

#include "spkidx/codebook.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>

#include "spkidx/error.h"
#include "spkidx/parallel.h"

namespace spkidx {

namespace {

// Uniform in [0, 1) from the top 53 bits; avoids the implementation-defined
// std::uniform_real_distribution so codebooks match across toolchains.
double Uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename A, typename B>
double SquaredDistance(const A &x, const B &c, Eigen::Index dim) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double diff = static_cast<double>(x[j]) - c[j];
    acc += diff * diff;
  }
  return acc;
}

struct Nearest {
  int index;
  double dist2;
};

// Nearest centroid for every row of `x`, equal to an exhaustive search with
// ties to the lowest index. The expanded form |c|^2 - 2 x.c runs as one GEMM
// per block and only screens candidates; the winner is picked on direct
// distances among those within rounding slack of the screened minimum.
template <typename Rows>
void FindNearestBlock(const Rows &x, const CentroidMatrix &centroids,
                      const Eigen::VectorXd &cnorm, Nearest *out) {
  const Eigen::Index dim = centroids.cols(), k = centroids.rows();
  const Eigen::MatrixXd xd = x.template cast<double>();
  const Eigen::MatrixXd cross = xd * centroids.transpose();
  const double cmax = cnorm.maxCoeff();
  for (Eigen::Index i = 0; i < xd.rows(); ++i) {
    const double xx = xd.row(i).squaredNorm();
    double screen_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < k; ++c)
      screen_min = std::min(screen_min, cnorm[c] - 2.0 * cross(i, c));
    const double slack = 1e-9 * (xx + cmax) + 1e-300;
    Nearest best{0, std::numeric_limits<double>::infinity()};
    for (Eigen::Index c = 0; c < k; ++c) {
      if (cnorm[c] - 2.0 * cross(i, c) > screen_min + slack) continue;
      const double d2 =
          SquaredDistance(x.row(i).data(), centroids.row(c).data(), dim);
      if (d2 < best.dist2) best = {static_cast<int>(c), d2};
    }
    out[i] = best;
  }
}

// Blocked, optionally parallel driver over all rows.
template <typename Matrix>
std::vector<Nearest> FindNearestAll(const Matrix &x,
                                    const CentroidMatrix &centroids,
                                    int threads) {
  constexpr Eigen::Index kBlock = 1024;
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd cnorm = centroids.rowwise().squaredNorm();
  std::vector<Nearest> out(n);
  const size_t n_blocks = static_cast<size_t>((n + kBlock - 1) / kBlock);
  ParallelFor(n_blocks, threads, [&](size_t begin, size_t end) {
    for (size_t b = begin; b < end; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * kBlock;
      const Eigen::Index rows = std::min(kBlock, n - r0);
      FindNearestBlock(x.middleRows(r0, rows), centroids, cnorm, &out[r0]);
    }
  });
  return out;
}

CentroidMatrix KMeansPlusPlus(const CentroidMatrix &x, int k,
                              std::mt19937_64 &rng) {
  const Eigen::Index n = x.rows(), dim = x.cols();
  CentroidMatrix centroids(k, dim);
  auto first = static_cast<Eigen::Index>(Uniform01(rng) * n);
  centroids.row(0) = x.row(std::min(first, n - 1));
  std::vector<double> d2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d2[i] = SquaredDistance(x.row(i).data(), centroids.row(0).data(), dim);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0))
      throw Error(ErrorKind::kTooFewFrames,
                  "only " + std::to_string(c) +
                      " distinct frames for a codebook of size " +
                      std::to_string(k));
    const double target = Uniform01(rng) * total;
    double cum = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      cum += d2[i];
      if (d2[i] > 0.0 && cum > target) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {  // rounding left target at the very end
      for (Eigen::Index i = n - 1; i >= 0; --i)
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(
          d2[i], SquaredDistance(x.row(i).data(), centroids.row(c).data(), dim));
  }
  return centroids;
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

int AutoCodebookSize(int n_segments, int64_t pooled_frames) {
  int64_t k = std::min<int64_t>(n_segments, 1024);
  k = std::min<int64_t>(k, pooled_frames / 10);
  return static_cast<int>(std::max<int64_t>(k, 1));
}

Codebook TrainCodebook(const Eigen::Ref<const FrameMatrix> &pooled, int k,
                       uint64_t seed, const KMeansOptions &options,
                       KMeansTrace *trace) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "codebook size < 1");
  const Eigen::Index n = pooled.rows(), dim = pooled.cols();
  if (n < k)
    throw Error(ErrorKind::kTooFewFrames,
                std::to_string(n) + " frames for a codebook of size " +
                    std::to_string(k));
  const CentroidMatrix x = pooled.cast<double>();

  std::mt19937_64 rng(seed);
  Codebook cb;
  cb.train_seed = seed;
  cb.centroids = KMeansPlusPlus(x, k, rng);

  // Lloyd iterations with Hamerly's bounds: `upper` bounds the distance to
  // the assigned centroid, `lower` the distance to every other one. A point
  // whose upper bound is below both the lower bound and half the gap to the
  // nearest other centroid keeps its assignment without a full search. The
  // bounds are shrunk by a relative slack so rounding can never skip a
  // closer (or equally close, lower-index) centroid.
  constexpr double kShrink = 1.0 - 1e-9;
  std::vector<int> assign(n);
  std::vector<double> dist2(n), upper(n), lower(n);
  std::vector<double> half_gap(k), moved(k);
  auto full_search = [&](Eigen::Index i) {
    const double *xi = x.row(i).data();
    double best = std::numeric_limits<double>::infinity(), second = best;
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double d2 = SquaredDistance(xi, cb.centroids.row(c).data(), dim);
      if (d2 < best) {
        second = best;
        best = d2;
        arg = c;
      } else if (d2 < second) {
        second = d2;
      }
    }
    assign[i] = arg;
    dist2[i] = best;
    upper[i] = std::sqrt(best);
    lower[i] = std::sqrt(second);
  };

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < std::max(1, options.max_iterations); ++iter) {
    if (iter > 0) {
      for (int c = 0; c < k; ++c) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int o = 0; o < k; ++o)
          if (o != c)
            nearest = std::min(nearest, (cb.centroids.row(c) -
                                         cb.centroids.row(o)).squaredNorm());
        half_gap[c] = 0.5 * std::sqrt(nearest);
      }
    }
    ParallelFor(static_cast<size_t>(n), options.threads,
                [&](size_t begin, size_t end) {
                  for (size_t t = begin; t < end; ++t) {
                    const auto i = static_cast<Eigen::Index>(t);
                    if (iter == 0) {
                      full_search(i);
                      continue;
                    }
                    const int a = assign[i];
                    const double bound = std::max(half_gap[a], lower[i]) * kShrink;
                    const double d2 = SquaredDistance(
                        x.row(i).data(), cb.centroids.row(a).data(), dim);
                    if (upper[i] < bound) {
                      dist2[i] = d2;
                      continue;
                    }
                    upper[i] = std::sqrt(d2);
                    if (upper[i] < bound) {
                      dist2[i] = d2;
                      continue;
                    }
                    full_search(i);
                  }
                });
    double inertia = 0.0;
    for (double v : dist2) inertia += v;
    if (trace) trace->inertia.push_back(inertia);
    if (inertia == 0.0) break;
    if (std::isfinite(prev_inertia) &&
        (prev_inertia - inertia) / prev_inertia < options.tolerance)
      break;
    prev_inertia = inertia;
    if (iter + 1 == options.max_iterations) break;

    const CentroidMatrix previous = cb.centroids;
    CentroidMatrix sums = CentroidMatrix::Zero(k, dim);
    std::vector<int64_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(i);
      ++counts[assign[i]];
    }
    std::vector<Eigen::Index> reseeded;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        cb.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty: steal the farthest point of the largest cluster.
      const int largest = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (assign[i] == largest && (far < 0 || dist2[i] > dist2[far])) far = i;
      cb.centroids.row(c) = x.row(far);
      assign[far] = c;
      dist2[far] = 0.0;
      reseeded.push_back(far);
      --counts[largest];
      counts[c] = 1;
      if (trace) ++trace->reseeded_clusters;
    }

    int most = 0;
    double most_moved = 0.0, second_moved = 0.0;
    for (int c = 0; c < k; ++c) {
      moved[c] = (cb.centroids.row(c) - previous.row(c)).norm();
      if (moved[c] > most_moved) {
        second_moved = most_moved;
        most_moved = moved[c];
        most = c;
      } else if (moved[c] > second_moved) {
        second_moved = moved[c];
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      upper[i] += moved[assign[i]];
      lower[i] -= assign[i] == most ? second_moved : most_moved;
    }
    for (Eigen::Index i : reseeded) upper[i] = lower[i] = 0.0;
  }
  return cb;
}

std::vector<int> Quantize(const Eigen::Ref<const FrameMatrix> &frames,
                          const Codebook &cb) {
  if (frames.cols() != cb.dim())
    throw Error(ErrorKind::kDimensionMismatch,
                "frames of dimension " + std::to_string(frames.cols()) +
                    " vs codebook dimension " + std::to_string(cb.dim()));
  const std::vector<Nearest> nearest = FindNearestAll(frames, cb.centroids, 1);
  std::vector<int> out(frames.rows());
  for (size_t t = 0; t < out.size(); ++t) out[t] = nearest[t].index;
  return out;
}

HistogramVec BuildHistogram(std::span<const int> indices, int k,
                            int segment_id) {
  if (indices.empty())
    throw Error(ErrorKind::kEmptySegment,
                "histogram of empty segment " + std::to_string(segment_id));
  HistogramVec h;
  h.segment_id = segment_id;
  h.weights = Eigen::VectorXd::Zero(k);
  for (int idx : indices) {
    if (idx < 0 || idx >= k)
      throw Error(ErrorKind::kOutOfRange,
                  "codeword " + std::to_string(idx) + " outside [0, " +
                      std::to_string(k) + ")");
    h.weights[idx] += 1.0;
  }
  h.weights /= static_cast<double>(indices.size());
  return h;
}

HistogramVec MergeHistograms(const HistogramVec &a, int64_t n_a,
                             const HistogramVec &b, int64_t n_b) {
  if (n_a < 0 || n_b < 0 || n_a + n_b == 0)
    throw Error(ErrorKind::kInvalidArgument, "histogram frame counts must be "
                                             "non-negative with a positive sum");
  if (n_a == 0) return b;
  if (n_b == 0) return a;
  if (a.size() != b.size())
    throw Error(ErrorKind::kDimensionMismatch,
                "histograms of size " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  HistogramVec m;
  m.segment_id = std::min(a.segment_id, b.segment_id);
  const double fa = static_cast<double>(n_a), fb = static_cast<double>(n_b);
  m.weights = (fa * a.weights + fb * b.weights) / (fa + fb);
  return m;
}

void WriteCodebook(const std::filesystem::path &path, const Codebook &cb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write("VQCB", 4);
  PutU32(out, static_cast<uint32_t>(cb.size()));
  PutU32(out, static_cast<uint32_t>(cb.dim()));
  for (int k = 0; k < cb.size(); ++k)
    for (Eigen::Index j = 0; j < cb.dim(); ++j)
      PutU32(out, std::bit_cast<uint32_t>(static_cast<float>(cb.centroids(k, j))));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

Codebook ReadCodebook(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "VQCB", 4) != 0)
    throw Error(ErrorKind::kBadMagic, path.string() + " is not a VQCB file");
  if (bytes.size() < 12)
    throw Error(ErrorKind::kDimensionMismatch,
                path.string() + ": truncated header");
  const uint32_t k = GetU32(&bytes[4]);
  const uint32_t dim = GetU32(&bytes[8]);
  if (bytes.size() != 12 + 4ull * k * dim)
    throw Error(ErrorKind::kDimensionMismatch,
                path.string() + ": payload does not match " +
                    std::to_string(k) + "x" + std::to_string(dim));
  Codebook cb;
  cb.centroids.resize(k, dim);
  const unsigned char *p = bytes.data() + 12;
  for (uint32_t r = 0; r < k; ++r)
    for (uint32_t j = 0; j < dim; ++j, p += 4)
      cb.centroids(r, j) = std::bit_cast<float>(GetU32(p));
  return cb;
}

}  // namespace spkidx
