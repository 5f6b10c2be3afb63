// spkidx/config.h

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

#ifndef SPKIDX_CONFIG_H_
#define SPKIDX_CONFIG_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "spkidx/clustering.h"
#include "spkidx/features.h"
#include "spkidx/synth.h"

namespace spkidx {

/// Raw `key = value` pairs. Later assignments replace earlier ones.
using ConfigValues = std::map<std::string, std::string>;

/// Every accepted key, grouped as paths, clustering, features and synth.
std::span<const std::string_view> KnownConfigKeys();

/// Flat `key = value` lines; blank lines and lines starting with `#` are
/// ignored. Throws kConfig on malformed lines and unknown keys.
ConfigValues ParseConfig(std::istream &in);
ConfigValues LoadConfig(const std::filesystem::path &path);

struct RunConfig {
  FeatureConfig features;
  ClusterConfig cluster;
  SynthSpec synth;
  std::map<std::string, std::filesystem::path> paths;

  /// Throws kConfig naming the missing key.
  const std::filesystem::path &path(const std::string &key) const;
  bool has_path(const std::string &key) const { return paths.contains(key); }
};

/// Typed view of a value map; throws kConfig for unknown keys and values
/// that do not parse or fail validation.
RunConfig BuildRunConfig(const ConfigValues &values);

}  // namespace spkidx

#endif  // SPKIDX_CONFIG_H_
