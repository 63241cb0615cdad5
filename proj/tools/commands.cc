// Copyright 2026 The cofscan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <thread>

#include "CLI11.hpp"

#include "cofscan/cfsearch.h"
#include "cofscan/cof.h"
#include "cofscan/datasets.h"
#include "cofscan/error.h"
#include "cofscan/evaluation.h"
#include "cofscan/runconfig.h"
#include "cofscan/serveapi.h"
#include "cofscan/toolproto.h"

namespace cofscan::cli {

namespace fs = std::filesystem;

namespace {

std::string FlagName(const std::string& param) {
  std::string f = "--" + param;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return f;
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

// ---- make-dataset ----------------------------------------------------------

struct MakeDatasetArgs {
  std::string kind;
  std::string out;
  int n = 100;
  int n_per_class = 500;
  double fraction = 0.10;
  bool stratified = false;
  int size = 64;
  int margin = 2;
  uint64_t seed = 0;
  std::string source;
  std::string stamped_texture = "opposite";
  std::string config_out;
};

int MakeDataset(const MakeDatasetArgs& a, std::ostream& out, std::ostream& err) {
  DatasetSummary summary;
  Json config;
  const fs::path out_dir(a.out);
  const std::string run_dir = "runs/" + out_dir.filename().string();
  try {
    if (a.kind == "colored-mnist") {
      ColoredMnistSpec spec;
      spec.n_per_class = a.n;
      spec.seed = a.seed;
      if (!a.source.empty()) spec.source_dir = a.source;
      summary = GenColoredMnist(spec, out_dir);
      config = ColoredMnistScanConfig(spec, "", run_dir);
    } else if (a.kind == "watermark") {
      WatermarkSpec spec;
      spec.fraction = a.fraction;
      spec.stratified = a.stratified;
      spec.n_per_class = a.n_per_class;
      spec.width = spec.height = a.size;
      spec.margin = a.margin;
      spec.seed = a.seed;
      spec.stamped_on_opposite_texture = a.stamped_texture == "opposite";
      summary = GenWatermarkDataset(spec, out_dir);
      config = WatermarkScanConfig(spec, "", run_dir);
    } else {
      err << "error: unknown dataset kind '" << a.kind
          << "' (expected colored-mnist or watermark)\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << "images: " << summary.images << "\n";
  for (const auto& [cls, n] : summary.per_class) out << "class " << cls << ": " << n << "\n";
  if (a.kind == "watermark") {
    out << "watermarked: " << summary.watermarked << "\n";
    for (const auto& [corner, n] : summary.watermarks_per_corner) {
      out << "  " << corner << ": " << n << "\n";
    }
  }
  if (!a.config_out.empty()) {
    const fs::path cfg_path(a.config_out);
    const fs::path base = fs::absolute(cfg_path).parent_path();
    config["dataset"] = fs::relative(fs::absolute(out_dir), base).string();
    WriteTextFile(cfg_path, config.dump(2) + "\n");
    out << "config: " << cfg_path.string() << "\n";
  }
  return kExitOk;
}

// ---- scan ------------------------------------------------------------------

struct ScanArgs {
  std::string config;
  std::optional<int> workers;
  std::string run_dir;
  bool flips_only = false;
  bool quiet = false;
};

int Scan(const ScanArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config;
  Dataset dataset;
  std::unique_ptr<Pipeline> pipeline;
  try {
    config = RunConfig::Load(a.config);
    if (!a.run_dir.empty()) config.run_dir = a.run_dir;
    if (a.flips_only) config.flips_only = true;
    config.workers = EffectiveWorkers(config.workers);
    if (a.workers) config.workers = *a.workers;
    if (config.workers < 1) throw Error(ErrorCode::kConfigError, "workers must be >= 1");
    dataset = LoadDataset(config.dataset);
    pipeline = std::make_unique<Pipeline>(BuildPipeline(config));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  ScanOptions opts;
  opts.run_dir = config.run_dir;
  opts.run_id = config.run_id;
  opts.workers = config.workers;
  opts.flips_only = config.flips_only;
  std::size_t last_pct = 0;
  if (!a.quiet) {
    opts.progress = [&](std::size_t done, std::size_t total) {
      const std::size_t pct = done * 100 / total;
      if (pct / 10 != last_pct / 10 || done == total) {
        err << "scan: " << done << "/" << total << " images\n";
        last_pct = pct;
      }
    };
  }
  ScanSummary s;
  try {
    s = ScanDataset(dataset, *pipeline, opts);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << "run: " << config.run_dir.string() << "\n"
      << "images: " << s.images << " (processed " << s.processed << ", skipped-no-segments "
      << s.skipped_no_segments << ", failed " << s.failed << ")\n"
      << "evaluations: " << s.evaluations << "\n"
      << "counterfactuals: " << s.counterfactuals << "\n"
      << "failed candidates: " << s.failed_candidates << "\n";
  if (s.determinism_mismatches > 0) {
    err << "error: classifier returned different classes for identical images ("
        << s.determinism_mismatches << " sampled images); see manifest.json\n";
    return kExitEmpty;
  }
  if (s.processed == 0) {
    err << "error: no image was processed\n";
    return kExitEmpty;
  }
  return kExitOk;
}

// ---- cof -------------------------------------------------------------------

struct CofArgs {
  std::string run;
  std::string mode;
  std::string cls;
  std::string position;
  bool misclassified_only = false;
  bool corrected_only = false;
  std::optional<int> min_support;
  double min_frequency = 0.0;
  std::optional<int> top_k;
  bool by_class = false;
  std::string by_position;
  std::string format = "text";
  std::string edit;
  std::string output;
};

int Cof(const CofArgs& a, std::ostream& out, std::ostream& err) {
  CofRequest req;
  TableFormat format;
  try {
    if (!a.mode.empty()) {
      try {
        req.query.mode = ParseCofMode(a.mode);
      } catch (const Error&) {
        throw CofRequestError("mode", "unknown mode '" + a.mode + "'");
      }
      req.mode_set = true;
    }
    if (!a.cls.empty()) req.query.class_filter = a.cls;
    if (!a.position.empty()) {
      try {
        req.query.position = ParsePosition(a.position);
      } catch (const Error&) {
        throw CofRequestError("position", "unknown position '" + a.position + "'");
      }
    }
    req.query.misclassified_only = a.misclassified_only;
    req.query.corrected_only = a.corrected_only;
    req.query.min_support = a.min_support;
    req.query.min_frequency = a.min_frequency;
    req.query.top_k = a.top_k;
    req.by_class = a.by_class;
    if (!a.by_position.empty()) req.by_position = a.by_position;
    if (!a.edit.empty()) req.query.edit_id = a.edit;
    try {
      format = ParseTableFormat(a.format);
    } catch (const Error&) {
      throw CofRequestError("format", "expected text, csv or json");
    }
  } catch (const CofRequestError& e) {
    err << "error: " << FlagName(e.param()) << ": " << e.what() << "\n";
    return kExitUsage;
  }

  EvaluationSet set;
  try {
    set = LoadEvaluationSet(a.run);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::string text;
  bool empty = false;
  try {
    text = RenderCofRequest(set, req, format);
    const Json j = CofRequestJson(set, req);
    empty = j.contains("by_class") ? j["by_class"].empty() : j["rows"].empty();
  } catch (const CofRequestError& e) {
    err << "error: " << FlagName(e.param()) << ": " << e.what() << "\n";
    return kExitUsage;
  }
  if (a.output.empty()) {
    out << text;
  } else {
    WriteTextFile(a.output, text);
  }
  if (empty) {
    err << "no counterfactuals match\n";
    return kExitEmpty;
  }
  return kExitOk;
}

// ---- explain ---------------------------------------------------------------

struct ExplainArgs {
  std::string source;
  std::string image_id;
  std::string out_dir;
};

struct Triptych {
  std::string label;
  std::string original_class;
  std::string edited_class;
  std::string edit_id;
  fs::path original;
  fs::path overlay;
  fs::path edited;
};

void PrintTriptychs(const std::vector<Triptych>& items, std::ostream& out) {
  for (const Triptych& t : items) {
    out << t.label << ": " << t.original_class << " → " << t.edited_class
        << " (edit " << t.edit_id << ")\n"
        << "  original: " << t.original.string() << "\n"
        << "  overlay:  " << t.overlay.string() << "\n"
        << "  edited:   " << t.edited.string() << "\n";
  }
}

fs::path WriteOverlay(const fs::path& dir, const std::string& image_id, int segment_index,
                      const RasterImage& original, const PixelMask& mask) {
  const fs::path p = dir / image_id / (std::to_string(segment_index) + "_overlay.png");
  SavePng(p, RenderOverlay(original, mask));
  return p;
}

int ExplainFromRun(const ExplainArgs& a, std::ostream& out, std::ostream& err) {
  LoadedRun run;
  try {
    run = LoadedRun::Load(a.source);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const bool known = run.image_status.count(a.image_id) || run.segments.count(a.image_id) ||
                     std::any_of(run.evaluations.rows.begin(), run.evaluations.rows.end(),
                                 [&](const Evaluation& e) { return e.image_id == a.image_id; });
  if (!known) {
    err << "error: unknown image '" << a.image_id << "'\n";
    return kExitUsage;
  }
  const fs::path original = run.dataset / "images" / (a.image_id + ".png");
  const fs::path overlay_dir = a.out_dir.empty() ? run.dir / "explain" : fs::path(a.out_dir);
  std::vector<Triptych> items;
  try {
    std::optional<RasterImage> image;
    for (const Evaluation& e : run.evaluations.rows) {
      if (e.image_id != a.image_id || !e.flipped) continue;
      Triptych t{e.segment_label, e.original_class, e.edited_class, e.edit_id, original, {},
                 ArtifactPath(run.dir, e.image_id, e.segment_index, e.edit_id)};
      const auto seg = run.segments.find(e.image_id);
      if (seg != run.segments.end() && e.segment_index < static_cast<int>(seg->second.size()) &&
          fs::exists(original)) {
        if (!image) image = LoadPng(original);
        t.overlay = WriteOverlay(overlay_dir, e.image_id, e.segment_index, *image,
                                 seg->second[e.segment_index]);
      }
      items.push_back(std::move(t));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (items.empty()) {
    out << "no counterfactuals for image '" << a.image_id << "'\n";
    return kExitEmpty;
  }
  PrintTriptychs(items, out);
  return kExitOk;
}

int ExplainLive(const ExplainArgs& a, std::ostream& out, std::ostream& err) {
  try {
    RunConfig config = RunConfig::Load(a.source);
    const Dataset dataset = LoadDataset(config.dataset);
    const auto it = std::find_if(dataset.images.begin(), dataset.images.end(),
                                 [&](const DatasetImage& d) { return d.id == a.image_id; });
    if (it == dataset.images.end()) {
      err << "error: unknown image '" << a.image_id << "'\n";
      return kExitUsage;
    }
    const fs::path dir = a.out_dir.empty() ? config.run_dir / "explain-live" : fs::path(a.out_dir);
    config.run_dir = dir;
    const Pipeline pipeline = BuildPipeline(config);
    ScanOptions opts;
    opts.run_dir = dir;
    opts.run_id = config.run_id;
    const ImageScanResult r = ScanImage(*it, pipeline, opts);
    std::error_code ec;
    fs::remove_all(dir / "work", ec);
    if (r.status == ImageStatus::kFailed) {
      err << "error: " << r.error << "\n";
      return kExitEmpty;
    }
    for (const CandidateFailure& f : r.failures) {
      err << "warning: segment " << f.segment_index << " edit " << f.edit_id << ": " << f.error
          << "\n";
    }
    std::vector<Triptych> items;
    std::optional<RasterImage> image;
    for (const Evaluation& e : r.evaluations) {
      if (!e.flipped) continue;
      if (!image) image = LoadPng(it->path);
      items.push_back({e.segment_label, e.original_class, e.edited_class, e.edit_id, it->path,
                       WriteOverlay(dir / "explain", e.image_id, e.segment_index, *image,
                                    r.segments[e.segment_index].mask),
                       ArtifactPath(dir, e.image_id, e.segment_index, e.edit_id)});
    }
    if (items.empty()) {
      out << "no counterfactuals for image '" << a.image_id << "'\n";
      return kExitEmpty;
    }
    PrintTriptychs(items, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int Explain(const ExplainArgs& a, std::ostream& out, std::ostream& err) {
  if (fs::is_regular_file(a.source) && fs::path(a.source).extension() == ".json") {
    return ExplainLive(a, out, err);
  }
  return ExplainFromRun(a, out, err);
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::vector<std::string> runs;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int Serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  std::shared_ptr<ResultsApi> api;
  try {
    std::vector<fs::path> dirs(a.runs.begin(), a.runs.end());
    api = std::make_shared<ResultsApi>(dirs);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  // Block the stop signals before any server thread starts so that only the
  // waiter below receives them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  ResultsServer server(api);
  const int port = server.Bind(a.host, a.port);
  if (port < 0) {
    err << "error: cannot bind " << a.host << ":" << a.port << "\n";
    return kExitUsage;
  }
  out << "serving " << api->run_ids().size() << " run(s) on http://" << a.host << ":" << port
      << "/api/runs\n"
      << std::flush;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.Stop();
  });
  const bool ok = server.Listen();
  // Listen returned on its own (not via a signal): release the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return ok ? kExitOk : kExitUsage;
}

// ---- check-tool ------------------------------------------------------------

struct CheckToolArgs {
  std::vector<std::string> command;
  std::string scratch;
  int handshake_timeout_ms = 10'000;
  int call_timeout_ms = 30'000;
};

int CheckTool(const CheckToolArgs& a, std::ostream& out, std::ostream& err) {
  if (a.command.empty()) {
    err << "error: no tool command given\n";
    return kExitUsage;
  }
  ToolCommand cmd;
  cmd.program = a.command.front();
  cmd.args.assign(a.command.begin() + 1, a.command.end());
  fs::path scratch = a.scratch;
  bool own_scratch = false;
  if (scratch.empty()) {
    scratch = fs::temp_directory_path() / ("cofscan-check-" + std::to_string(::getpid()));
    own_scratch = true;
  }
  ToolTimeouts timeouts;
  timeouts.handshake = std::chrono::milliseconds(a.handshake_timeout_ms);
  timeouts.call = std::chrono::milliseconds(a.call_timeout_ms);
  const auto checks = RunConformanceSuite(cmd, scratch.string(), timeouts);
  bool all = true;
  for (const ConformanceCheck& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
    all = all && c.passed;
  }
  if (own_scratch) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
  }
  return all ? kExitOk : kExitEmpty;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counterfactual scanning and CoF tables for image classifiers", "cofscan"};
  app.require_subcommand(1);

  MakeDatasetArgs md;
  auto* mk = app.add_subcommand("make-dataset", "Generate a controlled-bias dataset");
  mk->add_option("kind", md.kind, "colored-mnist | watermark")->required();
  mk->add_option("--out", md.out, "Output directory")->required();
  mk->add_option("--n", md.n, "colored-mnist: images per class")->check(CLI::PositiveNumber);
  mk->add_option("--source", md.source,
                 "colored-mnist: directory with grayscale images/ and labels.csv");
  mk->add_option("--n-per-class", md.n_per_class, "watermark: images per class")
      ->check(CLI::PositiveNumber);
  mk->add_option("--fraction", md.fraction, "watermark: stamped share of class A")
      ->check(CLI::Range(0.0, 1.0));
  mk->add_flag("--stratified", md.stratified, "watermark: balance corners exactly");
  mk->add_option("--size", md.size, "watermark: image side in pixels")->check(CLI::PositiveNumber);
  mk->add_option("--margin", md.margin, "watermark: stamp inset from the corner")
      ->check(CLI::NonNegativeNumber);
  mk->add_option("--stamped-texture", md.stamped_texture,
                 "watermark: texture under stamped images")
      ->check(CLI::IsMember({"opposite", "own"}));
  mk->add_option("--seed", md.seed, "Generator seed");
  mk->add_option("--config-out", md.config_out, "Also write a matching scan config here");

  ScanArgs sc;
  auto* scan = app.add_subcommand("scan", "Run the counterfactual search");
  scan->add_option("config", sc.config, "Run configuration (JSON)")->required();
  scan->add_option("--workers", sc.workers, "Worker threads")->check(CLI::PositiveNumber);
  scan->add_option("--run-dir", sc.run_dir, "Override the run directory");
  scan->add_flag("--flips-only", sc.flips_only, "Persist only counterfactual rows");
  scan->add_flag("-q,--quiet", sc.quiet, "No progress output");

  CofArgs ca;
  auto* cof = app.add_subcommand("cof", "Render a CoF table");
  cof->add_option("run", ca.run, "Run directory or evaluations file")->required();
  cof->add_option("--mode", ca.mode, "counts | share | per-image | conditional");
  cof->add_option("--class", ca.cls, "Restrict to one original class");
  cof->add_option("--position", ca.position, "top-left | top-right | bottom-left | bottom-right");
  cof->add_flag("--misclassified-only", ca.misclassified_only);
  cof->add_flag("--corrected-only", ca.corrected_only);
  cof->add_option("--min-support", ca.min_support);
  cof->add_option("--min-frequency", ca.min_frequency);
  cof->add_option("--top-k", ca.top_k);
  cof->add_flag("--by-class", ca.by_class, "One table per original class");
  cof->add_option("--by-position", ca.by_position, "Position table for LABEL");
  cof->add_option("--edit", ca.edit, "Restrict to one edit id");
  cof->add_option("--format", ca.format, "text | csv | json");
  cof->add_option("-o,--output", ca.output, "Write to a file instead of stdout");

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Show the counterfactuals of one image");
  explain->add_option("source", ex.source, "Run directory, or a config for a live run")
      ->required();
  explain->add_option("image_id", ex.image_id)->required();
  explain->add_option("--out", ex.out_dir, "Where overlays (and live artifacts) go");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Serve runs over HTTP");
  serve->add_option("runs", sv.runs, "Run directories")->required();
  serve->add_option("--host", sv.host);
  serve->add_option("--port", sv.port)->check(CLI::Range(0, 65535));

  CheckToolArgs ct;
  auto* check = app.add_subcommand("check-tool", "Protocol conformance checks for a tool");
  check->add_option("command", ct.command, "Tool command (use -- before it)")->required();
  check->add_option("--scratch", ct.scratch, "Directory for probe images");
  check->add_option("--handshake-timeout-ms", ct.handshake_timeout_ms);
  check->add_option("--call-timeout-ms", ct.call_timeout_ms);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) {
      err << sub->help();
    }
    return kExitUsage;
  }

  if (*mk) return MakeDataset(md, out, err);
  if (*scan) return Scan(sc, out, err);
  if (*cof) return Cof(ca, out, err);
  if (*explain) return Explain(ex, out, err);
  if (*serve) return Serve(sv, out, err);
  if (*check) return CheckTool(ct, out, err);
  return kExitUsage;
}

}  // namespace cofscan::cli
