// src/config.cc

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

#include "spkidx/config.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>

#include "spkidx/error.h"

namespace spkidx {

namespace {

constexpr std::array<std::string_view, 32> kKeys = {
    // paths
    "out", "features", "wav", "segments", "reference", "assignment", "report",
    "codebook",
    // clustering and threshold
    "mode", "n_best", "lambda", "seed", "codebook_size", "alpha", "beta",
    "trim_top", "threads", "kmeans_max_iter",
    // front end
    "frame_len_ms", "frame_shift_ms", "n_mfcc", "include_energy",
    "include_delta", "include_delta_delta", "n_mel_filters", "preemphasis",
    // synthetic data
    "n_speakers", "segments_per_speaker", "min_frames", "max_frames", "dim",
    "spread"};

constexpr std::array<std::string_view, 8> kPathKeys = {
    "out", "features", "wav", "segments", "reference", "assignment", "report",
    "codebook"};

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

void CheckKey(const std::string &key) {
  if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
    throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

template <typename T>
T ParseAs(const std::string &key, const std::string &value) {
  T out{};
  const char *end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorKind::kConfig,
                "bad value '" + value + "' for key '" + key + "'");
  return out;
}

bool ParseBool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorKind::kConfig,
              "bad boolean '" + value + "' for key '" + key + "'");
}

}  // namespace

std::span<const std::string_view> KnownConfigKeys() { return kKeys; }

ConfigValues ParseConfig(std::istream &in) {
  ConfigValues values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::kConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = Trim(std::string_view(trimmed).substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorKind::kConfig,
                  "line " + std::to_string(line_no) + ": empty key or value");
    CheckKey(key);
    values[key] = value;
  }
  return values;
}

ConfigValues LoadConfig(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  return ParseConfig(in);
}

const std::filesystem::path &RunConfig::path(const std::string &key) const {
  const auto it = paths.find(key);
  if (it == paths.end())
    throw Error(ErrorKind::kConfig, "missing required path '" + key + "'");
  return it->second;
}

RunConfig BuildRunConfig(const ConfigValues &values) {
  RunConfig rc;
  for (const auto &[key, value] : values) {
    CheckKey(key);
    if (std::find(kPathKeys.begin(), kPathKeys.end(), key) != kPathKeys.end()) {
      rc.paths[key] = value;
    } else if (key == "mode") {
      rc.cluster.mode = ParseClusterMode(value);
    } else if (key == "n_best") {
      rc.cluster.n_best = ParseAs<int>(key, value);
    } else if (key == "lambda") {
      if (value == "auto")
        rc.cluster.lambda.reset();
      else
        rc.cluster.lambda = ParseAs<double>(key, value);
    } else if (key == "seed") {
      rc.cluster.seed = ParseAs<uint64_t>(key, value);
      rc.synth.seed = rc.cluster.seed;
    } else if (key == "codebook_size") {
      if (value == "auto")
        rc.cluster.codebook_size.reset();
      else
        rc.cluster.codebook_size = ParseAs<int>(key, value);
    } else if (key == "alpha") {
      rc.cluster.threshold.alpha = ParseAs<double>(key, value);
    } else if (key == "beta") {
      rc.cluster.threshold.beta = ParseAs<double>(key, value);
    } else if (key == "trim_top") {
      rc.cluster.threshold.trim_top = ParseBool(key, value);
    } else if (key == "threads") {
      rc.cluster.threads = ParseAs<int>(key, value);
    } else if (key == "kmeans_max_iter") {
      rc.cluster.kmeans.max_iterations = ParseAs<int>(key, value);
    } else if (key == "frame_len_ms") {
      rc.features.frame_len_ms = ParseAs<int>(key, value);
    } else if (key == "frame_shift_ms") {
      rc.features.frame_shift_ms = ParseAs<int>(key, value);
    } else if (key == "n_mfcc") {
      rc.features.n_mfcc = ParseAs<int>(key, value);
    } else if (key == "include_energy") {
      rc.features.include_energy = ParseBool(key, value);
    } else if (key == "include_delta") {
      rc.features.include_delta = ParseBool(key, value);
    } else if (key == "include_delta_delta") {
      rc.features.include_delta_delta = ParseBool(key, value);
    } else if (key == "n_mel_filters") {
      rc.features.n_mel_filters = ParseAs<int>(key, value);
    } else if (key == "preemphasis") {
      rc.features.preemphasis = ParseAs<double>(key, value);
    } else if (key == "n_speakers") {
      rc.synth.n_speakers = ParseAs<int>(key, value);
    } else if (key == "segments_per_speaker") {
      rc.synth.segments_per_speaker = ParseAs<int>(key, value);
    } else if (key == "min_frames") {
      rc.synth.min_frames = ParseAs<int>(key, value);
    } else if (key == "max_frames") {
      rc.synth.max_frames = ParseAs<int>(key, value);
    } else if (key == "dim") {
      rc.synth.dim = ParseAs<int>(key, value);
    } else if (key == "spread") {
      rc.synth.spread = ParseAs<double>(key, value);
    }
  }
  rc.features.Validate();
  rc.cluster.Validate();
  rc.synth.Validate();
  if (rc.cluster.kmeans.max_iterations < 1)
    throw Error(ErrorKind::kConfig, "kmeans_max_iter must be >= 1");
  return rc;
}

}  // namespace spkidx
