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

#include "cofscan/runconfig.h"

#include <cstdlib>
#include <fstream>
#include <set>

#include "cofscan/error.h"
#include "cofscan/segmenters.h"

namespace cofscan {

namespace fs = std::filesystem;

namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

ToolCommand ResolveTool(const Json& j, const fs::path& base) {
  ToolCommand cmd = ToolCommand::FromJson(j);
  if (cmd.program.find('/') != std::string::npos) {
    cmd.program = Resolve(base, cmd.program).string();
  }
  return cmd;
}

Json PathJson(const fs::path& p) { return p.string(); }

}  // namespace

Json RunConfig::ToJson() const {
  Json j;
  j["run_id"] = run_id;
  j["dataset"] = PathJson(dataset);
  j["run_dir"] = PathJson(run_dir);
  Json seg;
  seg["kind"] = segmenter.kind;
  if (segmenter.annotations) seg["annotations"] = PathJson(*segmenter.annotations);
  if (segmenter.tool) seg["tool"] = segmenter.tool->ToJson();
  if (segmenter.prompt) seg["prompt"] = *segmenter.prompt;
  seg["fill_unrecognised"] = segmenter.fill_unrecognised;
  j["segmenter"] = std::move(seg);
  Json edit_list = Json::array();
  for (const EditSpec& e : edits) edit_list.push_back(e.ToJson());
  j["edits"] = std::move(edit_list);
  j["classifier"] = classifier.ToJson();
  j["flips_only"] = flips_only;
  j["workers"] = workers;
  j["seed"] = seed;
  j["tool_pool"] = {{"size", tool_pool.size},
                    {"max_restarts", tool_pool.max_restarts},
                    {"call_timeout_ms", tool_pool.timeouts.call.count()},
                    {"handshake_timeout_ms", tool_pool.timeouts.handshake.count()}};
  return j;
}

RunConfig RunConfig::FromJson(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  RunConfig c;
  try {
    if (!j.contains("dataset")) throw Error(ErrorCode::kConfigError, "missing \"dataset\"");
    c.dataset = Resolve(base_dir, j["dataset"].get<std::string>());
    if (!j.contains("run_dir")) throw Error(ErrorCode::kConfigError, "missing \"run_dir\"");
    c.run_dir = Resolve(base_dir, j["run_dir"].get<std::string>());
    c.run_id = j.value("run_id", c.run_dir.filename().string());
    if (c.run_id.empty()) throw Error(ErrorCode::kConfigError, "empty run_id");

    if (j.contains("segmenter")) {
      const Json& s = j["segmenter"];
      c.segmenter.kind = s.value("kind", c.segmenter.kind);
      if (s.contains("annotations")) {
        c.segmenter.annotations = Resolve(base_dir, s["annotations"].get<std::string>());
      }
      if (s.contains("tool")) c.segmenter.tool = ResolveTool(s["tool"], base_dir);
      if (s.contains("prompt")) c.segmenter.prompt = s["prompt"].get<std::string>();
      c.segmenter.fill_unrecognised = s.value("fill_unrecognised", false);
    }
    const std::string& kind = c.segmenter.kind;
    if (kind != "dominant_color" && kind != "annotations" && kind != "external") {
      throw Error(ErrorCode::kConfigError, "unknown segmenter kind '" + kind + "'");
    }
    if (kind == "external" && !c.segmenter.tool) {
      throw Error(ErrorCode::kConfigError, "external segmenter needs a \"tool\"");
    }
    if (kind == "annotations" && !c.segmenter.annotations) {
      c.segmenter.annotations = c.dataset / "annotations.json";
    }

    if (!j.contains("edits") || !j["edits"].is_array() || j["edits"].empty()) {
      throw Error(ErrorCode::kConfigError, "\"edits\" must be a non-empty array");
    }
    std::set<std::string> ids;
    for (const Json& e : j["edits"]) {
      Json copy = e;
      EditSpec spec = EditSpec::FromJson(copy);
      if (e.contains("tool")) spec.tool = ResolveTool(e["tool"], base_dir);
      if (!ids.insert(spec.edit_id).second) {
        throw Error(ErrorCode::kConfigError, "duplicate edit id '" + spec.edit_id + "'");
      }
      c.edits.push_back(std::move(spec));
    }

    if (!j.contains("classifier")) throw Error(ErrorCode::kConfigError, "missing \"classifier\"");
    c.classifier = ClassifierRef::FromJson(j["classifier"]);
    if (c.classifier.kind == ClassifierKind::kExternal) {
      c.classifier.tool = ResolveTool(j["classifier"]["tool"], base_dir);
    }

    c.flips_only = j.value("flips_only", false);
    c.workers = j.value("workers", 1);
    if (c.workers < 1) throw Error(ErrorCode::kConfigError, "workers must be >= 1");
    c.seed = j.value("seed", uint64_t{0});
    if (j.contains("tool_pool")) {
      const Json& t = j["tool_pool"];
      c.tool_pool.size = t.value("size", 1);
      c.tool_pool.max_restarts = t.value("max_restarts", 2);
      c.tool_pool.timeouts.call = std::chrono::milliseconds(
          t.value("call_timeout_ms", static_cast<int64_t>(c.tool_pool.timeouts.call.count())));
      c.tool_pool.timeouts.handshake = std::chrono::milliseconds(t.value(
          "handshake_timeout_ms", static_cast<int64_t>(c.tool_pool.timeouts.handshake.count())));
      if (c.tool_pool.size < 1 || c.tool_pool.max_restarts < 0) {
        throw Error(ErrorCode::kConfigError, "tool_pool size must be >= 1, max_restarts >= 0");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    throw Error(ErrorCode::kConfigError, e.what());
  }
  return c;
}

RunConfig RunConfig::Load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read config " + path.string());
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfigError, "config is not valid JSON: " + path.string());
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return FromJson(j, base);
}

int EffectiveWorkers(int configured) {
  if (const char* env = std::getenv("COFSCAN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 4096) return static_cast<int>(v);
  }
  return configured;
}

Pipeline BuildPipeline(const RunConfig& config) {
  Pipeline p;
  p.config = config.ToJson();
  auto pool = [&](const ToolCommand& cmd) {
    return std::make_shared<ToolPool>(cmd, config.tool_pool.size,
                                      config.tool_pool.max_restarts,
                                      config.tool_pool.timeouts);
  };

  std::unique_ptr<Segmenter> seg;
  if (config.segmenter.kind == "dominant_color") {
    seg = MakeDominantColorSegmenter();
  } else if (config.segmenter.kind == "annotations") {
    seg = MakeAnnotationSegmenter(AnnotationStore::Load(*config.segmenter.annotations));
  } else {
    auto tool = pool(*config.segmenter.tool);
    if (!tool->info().Supports("segment")) {
      throw Error(ErrorCode::kConfigError, "segmenter tool does not advertise \"segment\"");
    }
    p.tools.emplace_back("segmenter", tool);
    seg = MakeExternalSegmenter(tool, config.segmenter.prompt);
  }
  if (config.segmenter.fill_unrecognised) seg = WithUnrecognisedFill(std::move(seg));
  p.segmenter = std::move(seg);

  const fs::path work = config.run_dir / "work";
  for (const EditSpec& spec : config.edits) {
    std::shared_ptr<ToolPool> tool;
    if (spec.kind == EditKind::kExternalInfill) {
      if (!spec.tool) throw Error(ErrorCode::kConfigError, "edit '" + spec.edit_id + "' needs a tool");
      tool = pool(*spec.tool);
      if (!tool->info().Supports("infill")) {
        throw Error(ErrorCode::kConfigError, "infill tool does not advertise \"infill\"");
      }
      p.tools.emplace_back("edit:" + spec.edit_id, tool);
    }
    p.editors.push_back(MakeEditor(spec, work, tool));
  }

  std::shared_ptr<ToolPool> ctool;
  if (config.classifier.kind == ClassifierKind::kExternal) {
    ctool = pool(*config.classifier.tool);
    if (!ctool->info().Supports("classify")) {
      throw Error(ErrorCode::kConfigError, "classifier tool does not advertise \"classify\"");
    }
    if (!ctool->info().deterministic) {
      throw ToolError(ToolFailure::kNondeterministic,
                      "classifier tool '" + ctool->info().name +
                          "' does not declare deterministic=true; refusing to run");
    }
    p.tools.emplace_back("classifier", ctool);
  }
  p.classifier = MakeClassifier(config.classifier, ctool);
  return p;
}

}  // namespace cofscan
