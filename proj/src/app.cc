// src/app.cc

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

#include "spkidx/app.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spkidx/audio_io.h"
#include "spkidx/codebook.h"
#include "spkidx/error.h"
#include "spkidx/features.h"
#include "spkidx/synth.h"

namespace spkidx {

namespace fs = std::filesystem;

namespace {

std::optional<int> ParseId(const std::string &s) {
  int id = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return id;
}

std::ofstream OpenOut(const fs::path &path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

void WriteThresholdSection(std::ostream &out, const ThresholdEstimate &est) {
  std::vector<double> sorted = est.per_segment_lambda;
  std::sort(sorted.begin(), sorted.end());
  out << "[threshold]\n"
      << "alpha = " << est.alpha << '\n'
      << "beta = " << est.beta << '\n'
      << "lambda_bar = " << est.lambda_bar << '\n'
      << "lambda_sigma = " << est.sigma << '\n'
      << "lambda_act = " << est.lambda_act << '\n'
      << "bounds_used = " << est.used_segment_ids.size() << '\n'
      << "bounds_skipped = " << est.skipped_segment_ids.size() << '\n';
  if (!sorted.empty())
    out << "bound_min = " << sorted.front() << '\n'
        << "bound_median = " << sorted[sorted.size() / 2] << '\n'
        << "bound_max = " << sorted.back() << '\n';
}

int64_t FramesFromDuration(double seconds) {
  return static_cast<int64_t>(std::llround(seconds * 100.0));
}

}  // namespace

std::vector<FeatureMatrix> LoadFeatureDir(const fs::path &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorKind::kIo, "feature directory not found: " + dir.string());
  std::vector<std::pair<int, fs::path>> files;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".fea") continue;
    const auto id = ParseId(entry.path().stem().string());
    if (!id)
      throw Error(ErrorKind::kParse,
                  "feature file name is not a segment id: " +
                      entry.path().string());
    files.emplace_back(*id, entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<FeatureMatrix> out;
  out.reserve(files.size());
  for (const auto &[id, path] : files) out.push_back(ReadFeatures(path));
  return out;
}

void WriteAssignment(const fs::path &path, const Assignment &a) {
  std::ofstream out = OpenOut(path);
  for (const auto &[seg, cluster] : a) out << seg << ' ' << cluster << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

Assignment ReadAssignment(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  Assignment a;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    std::string seg, cluster, extra;
    if (!(is >> seg)) continue;
    if (seg.front() == '#') continue;
    const auto s = ParseId(seg);
    std::optional<int> c;
    if (is >> cluster) c = ParseId(cluster);
    if (!s || !c || (is >> extra))
      throw Error(ErrorKind::kParse, path.string() + ": line " +
                                         std::to_string(line_no) +
                                         ": expected <segment_id> <cluster_id>");
    if (!a.emplace(*s, *c).second)
      throw Error(ErrorKind::kParse,
                  path.string() + ": duplicate segment " + std::to_string(*s));
  }
  return a;
}

void WriteClusterReport(std::ostream &out, const ClusterState &state,
                        const ClusterRunInfo &info) {
  const ClusterConfig &cfg = info.config;
  out << std::setprecision(10);
  out << "# spkidx cluster report\n"
      << "[summary]\n"
      << "mode = " << ClusterModeName(cfg.mode) << '\n'
      << "segments = " << info.n_segments << '\n'
      << "clusters = " << state.clusters.size() << '\n'
      << "iterations = " << state.iterations << '\n'
      << "merges = " << state.merge_log.size() << '\n'
      << "lambda = " << state.lambda << '\n'
      << "lambda_source = " << (state.threshold ? "auto" : "fixed") << '\n';
  if (cfg.mode == ClusterMode::kTwoStage) {
    out << "n_best = " << cfg.n_best << '\n'
        << "codebook_size = " << state.codebook_size << '\n'
        << "seed = " << cfg.seed << '\n'
        << "stopped_with_unscored_pairs = "
        << (state.stopped_with_unscored_pairs ? "true" : "false") << '\n';
  }
  out << "cosine_evals = " << state.cosine_evals << '\n'
      << "bic_evals = " << state.bic_evals << '\n';
  if (state.threshold) WriteThresholdSection(out, *state.threshold);
  out << "[merge_log]\n"
      << "# iteration id_a id_b cosine_rank delta_bic\n";
  for (const MergeRecord &m : state.merge_log)
    out << m.iteration << ' ' << m.id_a << ' ' << m.id_b << ' '
        << m.cosine_rank << ' ' << m.delta_bic << '\n';
  out << "[timing]\n"
      << "prepare_s = " << state.prepare_seconds << '\n'
      << "merge_s = " << state.merge_seconds << '\n'
      << "wall_s = " << info.wall_seconds << '\n';
  if (info.audio_seconds && *info.audio_seconds > 0.0)
    out << "audio_s = " << *info.audio_seconds << '\n'
        << "xrt = " << info.wall_seconds / *info.audio_seconds << '\n';
}

void WritePurityReport(std::ostream &out, const PurityReport &r) {
  out << std::fixed << std::setprecision(4);
  out << "Speaker purity  (segment / frame): " << r.sp_segment << " / "
      << r.sp_frame << '\n'
      << "Cluster purity  (segment / frame): " << r.cp_segment << " / "
      << r.cp_frame << '\n'
      << "Clusters: " << r.n_clusters << ", speakers: " << r.n_speakers << '\n';
  out << std::defaultfloat << std::setprecision(10);
  out << "[purity]\n"
      << "sp_segment = " << r.sp_segment << '\n'
      << "cp_segment = " << r.cp_segment << '\n'
      << "sp_frame = " << r.sp_frame << '\n'
      << "cp_frame = " << r.cp_frame << '\n'
      << "n_clusters = " << r.n_clusters << '\n'
      << "n_speakers = " << r.n_speakers << '\n'
      << "unlabeled = " << r.unlabeled_ids.size() << '\n';
  out << "[confusion_frames]\n# cluster";
  for (const std::string &s : r.confusion.speakers) out << ' ' << s;
  out << '\n';
  for (size_t i = 0; i < r.confusion.clusters.size(); ++i) {
    out << r.confusion.clusters[i];
    for (Eigen::Index j = 0; j < r.confusion.mass.cols(); ++j)
      out << ' ' << r.confusion.mass(static_cast<Eigen::Index>(i), j);
    out << '\n';
  }
}

void CmdSynth(const RunConfig &rc, std::ostream &log) {
  const fs::path &out = rc.path("out");
  const SynthCorpus corpus = GenerateSynthetic(rc.synth);
  WriteSynthetic(corpus, out);
  log << "wrote " << corpus.segments.size() << " segments of "
      << rc.synth.n_speakers << " speakers to " << out.string() << '\n';
}

void CmdExtract(const RunConfig &rc, std::ostream &log) {
  const fs::path &out = rc.path("out");
  const AudioBuffer audio = ReadWav(rc.path("wav"));
  const std::vector<SegmentSpan> spans = LoadSegments(rc.path("segments"));
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + out.string());
  std::vector<SegmentSpan> kept;
  for (const SegmentSpan &span : spans) {
    const AudioBuffer piece = SliceSegment(audio, span);
    if (piece.samples.empty()) {
      log << "warning: segment " << span.id << " has no samples, skipped\n";
      continue;
    }
    const FeatureMatrix fm = ExtractFeatures(piece, rc.features, span.id);
    if (fm.num_frames() == 0) {
      log << "warning: segment " << span.id
          << " is shorter than one analysis window, skipped\n";
      continue;
    }
    WriteFeatures(out / (std::to_string(span.id) + ".fea"), fm);
    kept.push_back(span);
  }
  WriteSegments(out / "segments.txt", kept);
  log << "extracted " << kept.size() << " of " << spans.size()
      << " segments (d = " << rc.features.dim() << ") to " << out.string()
      << '\n';
}

ClusterState CmdCluster(const RunConfig &rc, std::ostream &log) {
  using Clock = std::chrono::steady_clock;
  const fs::path &dir = rc.path("features");
  std::vector<FeatureMatrix> loaded = LoadFeatureDir(dir);
  std::vector<FeatureMatrix> segments;
  for (FeatureMatrix &fm : loaded) {
    if (fm.num_frames() == 0) {
      log << "warning: segment " << fm.segment_id << " has no frames, skipped\n";
      continue;
    }
    segments.push_back(std::move(fm));
  }
  if (segments.size() < 2)
    throw Error(ErrorKind::kInvalidArgument,
                "need at least 2 non-empty segments in " + dir.string());

  ClusterRunInfo info;
  info.config = rc.cluster;
  info.n_segments = segments.size();
  fs::path spans_path;
  if (rc.has_path("segments"))
    spans_path = rc.path("segments");
  else if (fs::exists(dir / "segments.txt"))
    spans_path = dir / "segments.txt";
  if (!spans_path.empty()) {
    double seconds = 0.0;
    for (const SegmentSpan &s : LoadSegments(spans_path)) seconds += s.duration();
    info.audio_seconds = seconds;
  }

  std::optional<fs::path> codebook_path;
  if (rc.has_path("codebook") && rc.cluster.mode == ClusterMode::kTwoStage) {
    codebook_path = rc.path("codebook");
    if (fs::exists(*codebook_path)) {
      info.config.codebook = ReadCodebook(*codebook_path);
      log << "using codebook " << codebook_path->string() << '\n';
    }
  }

  const auto start = Clock::now();
  ClusterState state = RunClustering(segments, info.config);
  info.wall_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();

  if (codebook_path && !info.config.codebook)
    WriteCodebook(*codebook_path, state.codebook);
  WriteAssignment(rc.path("assignment"), state.Assignment());
  if (state.stopped_with_unscored_pairs)
    log << "note: stopped with no positive dBIC among the " << rc.cluster.n_best
        << " closest pairs; remaining pairs were not rescanned\n";
  if (state.threshold && !state.threshold->skipped_segment_ids.empty())
    log << "warning: " << state.threshold->skipped_segment_ids.size()
        << " segments too short for lambda estimation\n";
  if (rc.has_path("report")) {
    std::ofstream out = OpenOut(rc.path("report"));
    WriteClusterReport(out, state, info);
  } else {
    WriteClusterReport(log, state, info);
  }
  log << segments.size() << " segments -> " << state.clusters.size()
      << " clusters (" << state.bic_evals << " dBIC evaluations)\n";
  return state;
}

PurityReport CmdEval(const RunConfig &rc, std::ostream &out, std::ostream &log) {
  const Assignment assignment = ReadAssignment(rc.path("assignment"));
  std::map<int, std::optional<std::string>> reference;
  std::map<int, int64_t> frames;
  for (const SegmentSpan &s : LoadSegments(rc.path("reference"))) {
    reference[s.id] = s.speaker;
    frames[s.id] = FramesFromDuration(s.duration());
  }
  if (rc.has_path("features")) {
    for (const FeatureMatrix &fm : LoadFeatureDir(rc.path("features")))
      if (frames.contains(fm.segment_id)) frames[fm.segment_id] = fm.num_frames();
  }
  const PurityReport report = Evaluate(assignment, reference, frames);
  if (!report.unlabeled_ids.empty())
    log << "warning: " << report.unlabeled_ids.size()
        << " unlabeled reference segments excluded\n";
  if (rc.has_path("out")) {
    std::ofstream file = OpenOut(rc.path("out"));
    WritePurityReport(file, report);
  }
  WritePurityReport(out, report);
  return report;
}

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"Speaker indexing: VQ fast-match + BIC agglomerative clustering"};
  app.require_subcommand(1);

  struct Flag {
    std::string key;
    std::string value;
    CLI::Option *option = nullptr;
  };
  // Stable addresses: options bind to the strings below.
  std::map<CLI::App *, std::vector<std::unique_ptr<Flag>>> flags;
  std::map<CLI::App *, std::string> config_paths;
  std::map<CLI::App *, std::vector<std::string>> overrides;

  auto add = [&](CLI::App *sub, const std::string &name, const std::string &help) {
    auto flag = std::make_unique<Flag>();
    flag->key = name;
    std::replace(flag->key.begin(), flag->key.end(), '-', '_');
    flag->option = sub->add_option("--" + name, flag->value, help);
    flags[sub].push_back(std::move(flag));
  };
  auto common = [&](CLI::App *sub) {
    sub->add_option("--config", config_paths[sub], "key = value config file");
    sub->add_option("--set", overrides[sub], "override any config key (key=value)");
    add(sub, "seed", "random seed");
    add(sub, "threads", "worker threads, 0 = one per core");
  };

  CLI::App *synth = app.add_subcommand("synth", "generate synthetic speakers");
  common(synth);
  add(synth, "out", "output directory");
  add(synth, "n-speakers", "number of speakers");
  add(synth, "segments-per-speaker", "segments per speaker");
  add(synth, "min-frames", "shortest segment in frames");
  add(synth, "max-frames", "longest segment in frames");
  add(synth, "dim", "feature dimension");
  add(synth, "spread", "speaker-mean spread in within-speaker deviations");

  CLI::App *extract = app.add_subcommand("extract", "MFCC features per segment");
  common(extract);
  add(extract, "wav", "16 kHz 16-bit PCM WAV");
  add(extract, "segments", "segment list");
  add(extract, "out", "output directory");
  add(extract, "n-mfcc", "cepstral coefficients");
  add(extract, "include-delta", "append deltas (true/false)");
  add(extract, "include-delta-delta", "append delta-deltas (true/false)");

  CLI::App *cluster = app.add_subcommand("cluster", "cluster segment features");
  common(cluster);
  add(cluster, "features", "directory of <id>.fea files");
  add(cluster, "assignment", "output assignment file");
  add(cluster, "report", "output run report");
  add(cluster, "segments", "segment list with durations (for xRT)");
  add(cluster, "mode", "baseline | two-stage");
  add(cluster, "n-best", "fast-match candidates per iteration");
  add(cluster, "lambda", "auto | <float>");
  add(cluster, "codebook-size", "auto | <int>");
  add(cluster, "codebook", "VQCB codebook cache");
  add(cluster, "alpha", "lambda estimate: mean weight");
  add(cluster, "beta", "lambda estimate: deviation weight");

  CLI::App *eval = app.add_subcommand("eval", "speaker and cluster purity");
  common(eval);
  add(eval, "assignment", "assignment file");
  add(eval, "reference", "segment list with speaker labels");
  add(eval, "features", "feature directory (exact frame counts)");
  add(eval, "out", "also write the report here");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CLI::App *sub = app.get_subcommands().front();
  try {
    ConfigValues values;
    if (!config_paths[sub].empty()) values = LoadConfig(config_paths[sub]);
    for (const std::string &kv : overrides[sub]) {
      std::istringstream line(kv);
      for (auto &[k, v] : ParseConfig(line)) values[k] = v;
    }
    for (const auto &flag : flags[sub])
      if (flag->option->count() > 0) values[flag->key] = flag->value;
    const RunConfig rc = BuildRunConfig(values);

    const std::string name = sub->get_name();
    if (name == "synth") {
      CmdSynth(rc, err);
    } else if (name == "extract") {
      CmdExtract(rc, err);
    } else if (name == "cluster") {
      CmdCluster(rc, err);
    } else {
      CmdEval(rc, out, err);
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace spkidx
