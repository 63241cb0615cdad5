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

#include <filesystem>
#include <functional>

#include "cofscan/error.h"
#include "cofscan/image.h"
#include "cofscan/toolproto.h"

namespace cofscan {
namespace {

std::vector<std::string> WriteProbeImages(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  const Rgb colors[] = {{255, 0, 0}, {0, 100, 0}, {100, 149, 237}};
  for (int i = 0; i < 3; ++i) {
    RasterImage img(16 + i, 12, colors[i]);
    for (int x = 2; x < 6; ++x) img.set(x, 3, Rgb{200, 200, 200});
    const auto path = dir / ("probe_" + std::to_string(i) + ".png");
    SavePng(path, img);
    paths.push_back(path.string());
  }
  return paths;
}

void Check(std::vector<ConformanceCheck>* out, const std::string& name,
           const std::function<std::string()>& body) {
  ConformanceCheck c{name, false, ""};
  try {
    c.detail = body();
    c.passed = c.detail.empty();
  } catch (const std::exception& e) {
    c.detail = e.what();
  }
  out->push_back(std::move(c));
}

}  // namespace

std::vector<ConformanceCheck> RunConformanceSuite(
    const ToolCommand& command, const std::string& scratch_dir,
    const ToolTimeouts& timeouts) {
  std::vector<ConformanceCheck> checks;
  const std::filesystem::path scratch(scratch_dir);
  std::vector<std::string> probes;
  try {
    probes = WriteProbeImages(scratch);
  } catch (const std::exception& e) {
    checks.push_back({"probe-images", false, e.what()});
    return checks;
  }

  std::unique_ptr<ExternalTool> tool;
  Check(&checks, "handshake", [&]() -> std::string {
    tool = ExternalTool::Spawn(command, timeouts);
    if (tool->info().name.empty()) return "hello name is empty";
    if (tool->info().ops.empty()) return "hello advertises no ops";
    for (const auto& op : tool->info().ops) {
      if (op != "classify" && op != "segment" && op != "infill") {
        return "unknown op advertised: " + op;
      }
    }
    return "";
  });
  if (tool == nullptr) return checks;
  const ToolInfo info = tool->info();

  if (info.Supports("classify")) {
    Check(&checks, "classify-shape-and-ids", [&]() -> std::string {
      for (int round = 0; round < 2; ++round) {
        for (const auto& p : probes) {
          ToolRequest req;
          req.op = "classify";
          req.image_path = p;
          const ToolResponse r = tool->Call(req);
          const Json& pl = r.payload;
          if (!pl.contains("class") || !pl["class"].is_string() ||
              pl["class"].get<std::string>().empty()) {
            return "classify payload lacks a non-empty \"class\"";
          }
          if (pl.contains("scores")) {
            if (!pl["scores"].is_object()) return "\"scores\" must be an object";
            const std::string label = pl["class"].get<std::string>();
            if (!pl["scores"].contains(label)) return "scores omit the decided class";
            const double best = pl["scores"][label].get<double>();
            for (const auto& [k, v] : pl["scores"].items()) {
              if (v.get<double>() > best) return "class does not attain the max score";
            }
          }
        }
      }
      return "";
    });
    if (info.deterministic) {
      Check(&checks, "classify-deterministic", [&]() -> std::string {
        for (const auto& p : probes) {
          ToolRequest req;
          req.op = "classify";
          req.image_path = p;
          const auto a = tool->Call(req).payload["class"];
          const auto b = tool->Call(req).payload["class"];
          if (a != b) return "two classifications of " + p + " differ";
        }
        return "";
      });
    }
  }

  if (info.Supports("segment")) {
    Check(&checks, "segment-shape", [&]() -> std::string {
      for (const auto& p : probes) {
        const RasterImage img = LoadPng(p);
        ToolRequest req;
        req.op = "segment";
        req.image_path = p;
        const ToolResponse r = tool->Call(req);
        if (!r.payload.contains("segments") || !r.payload["segments"].is_array()) {
          return "segment payload lacks \"segments\" array";
        }
        for (const auto& s : r.payload["segments"]) {
          if (!s.contains("label") || !s["label"].is_string() ||
              s["label"].get<std::string>().empty()) {
            return "segment without label";
          }
          const PixelMask m = MaskFromJson(s["mask"]);
          if (m.width() != img.width() || m.height() != img.height()) {
            return "segment mask dimensions differ from the image";
          }
        }
      }
      return "";
    });
  }

  if (info.Supports("infill")) {
    Check(&checks, "infill-shape", [&]() -> std::string {
      const RasterImage img = LoadPng(probes.front());
      Bitmap bits(img.width(), img.height());
      for (int x = 0; x < 4; ++x) bits.set(x, 0, true);
      ToolRequest req;
      req.op = "infill";
      req.image_path = probes.front();
      req.mask = RleEncode(bits);
      req.out_path = (scratch / "infill_out.png").string();
      const ToolResponse r = tool->Call(req);
      if (!r.payload.contains("out_path") || !r.payload["out_path"].is_string()) {
        return "infill payload lacks \"out_path\"";
      }
      const RasterImage out = LoadPng(r.payload["out_path"].get<std::string>());
      if (out.width() != img.width() || out.height() != img.height()) {
        return "infill result dimensions differ from the input";
      }
      return "";
    });
  }

  Check(&checks, "malformed-line-rejected", [&]() -> std::string {
    const std::string line = tool->SendRaw("this is not json");
    const Json j = Json::parse(line);
    if (!j.contains("ok") || j["ok"] != false) return "malformed request was not refused";
    if (!j.contains("error") || !j["error"].is_string()) return "refusal carries no error string";
    return "";
  });

  Check(&checks, "unknown-op-rejected", [&]() -> std::string {
    const std::string line = tool->SendRaw(R"({"id":900,"op":"no-such-op"})");
    const ToolResponse r = ToolResponse::Parse(line);
    if (r.id != 900) return "unknown-op response did not echo the id";
    if (r.ok) return "unknown op was accepted";
    return "";
  });

  Check(&checks, "alive-after-errors", [&]() -> std::string {
    // Ids keep increasing after the raw probes.
    ToolRequest req;
    req.op = info.ops.front();
    req.image_path = probes.front();
    if (req.op == "infill") {
      Bitmap bits(16, 12);
      bits.set(0, 0, true);
      req.mask = RleEncode(bits);
      req.out_path = (scratch / "infill_again.png").string();
    }
    tool->Call(req);
    return "";
  });

  return checks;
}

}  // namespace cofscan
