// spkidx/app.h

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

#ifndef SPKIDX_APP_H_
#define SPKIDX_APP_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spkidx/clustering.h"
#include "spkidx/config.h"
#include "spkidx/metrics.h"

namespace spkidx {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Entry point shared by the binary and the tests. args[0] is the program
/// name. Returns an exit code; diagnostics go to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

/// All <id>.fea files of a directory, sorted by id. Throws kIo when the
/// directory does not exist.
std::vector<FeatureMatrix> LoadFeatureDir(const std::filesystem::path &dir);

/// `<segment_id> <cluster_id>` lines sorted by segment id.
void WriteAssignment(const std::filesystem::path &path, const Assignment &a);
Assignment ReadAssignment(const std::filesystem::path &path);

struct ClusterRunInfo {
  ClusterConfig config;
  size_t n_segments = 0;
  std::optional<double> audio_seconds;  // known for audio-derived features
  double wall_seconds = 0.0;
};

/// Run report: key = value sections, merge log, then timing. Everything
/// before the [timing] section is deterministic for a fixed input and seed.
void WriteClusterReport(std::ostream &out, const ClusterState &state,
                        const ClusterRunInfo &info);

void WritePurityReport(std::ostream &out, const PurityReport &report);

// Subcommands; `log` receives progress and warnings.
void CmdSynth(const RunConfig &rc, std::ostream &log);
void CmdExtract(const RunConfig &rc, std::ostream &log);
ClusterState CmdCluster(const RunConfig &rc, std::ostream &log);
PurityReport CmdEval(const RunConfig &rc, std::ostream &out, std::ostream &log);

}  // namespace spkidx

#endif  // SPKIDX_APP_H_
