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

#include "doctest.h"

#include <fstream>
#include <thread>

#include "cofscan/datasets.h"
#include "cofscan/error.h"
#include "cofscan/serveapi.h"
#include "httplib.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::TempDir;
namespace fs = std::filesystem;

namespace {

// A small watermark run shared by the cases below.
struct Fixture {
  TempDir dir;
  fs::path run;
  fs::path data;
  Fixture() {
    data = dir / "data";
    run = dir / "wm";
    WatermarkSpec spec;
    spec.n_per_class = 20;
    spec.fraction = 0.2;
    spec.width = 32;
    spec.height = 32;
    GenWatermarkDataset(spec, data);
    testing::RunScanConfig(WatermarkScanConfig(spec, data.string(), run.string()));
  }
};

Fixture& Shared() {
  static Fixture f;
  return f;
}

Json Body(const ApiResponse& r) { return Json::parse(r.body); }

std::string Header(const ApiResponse& r, const std::string& name) {
  for (const auto& [k, v] : r.headers) {
    if (k == name) return v;
  }
  return "";
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("serveapi") {
  TEST_CASE("cof params") {
    const CofRequest r = CofRequestFromParams(
        {{"mode", "conditional"}, {"min_support", "5"}, {"position", "top-left"}, {"by_class", ""}});
    CHECK(r.mode_set);
    CHECK(r.query.mode == CofMode::kConditional);
    CHECK(r.query.min_support == 5);
    CHECK(r.query.position == PositionBucket::kTopLeft);
    CHECK(r.by_class);
    auto param_of = [](const QueryParams& p) {
      try {
        CofRequestFromParams(p);
      } catch (const CofRequestError& e) {
        return e.param();
      }
      return std::string();
    };
    CHECK(param_of({{"colour", "red"}}) == "colour");
    CHECK(param_of({{"mode", "a"}, {"mode", "b"}}) == "mode");
    CHECK(param_of({{"mode", "median"}}) == "mode");
    CHECK(param_of({{"top_k", "0"}}) == "top_k");
    CHECK(param_of({{"top_k", "x"}}) == "top_k");
    CHECK(param_of({{"min_support", "-2"}}) == "min_support");
    CHECK(param_of({{"by_class", "maybe"}}) == "by_class");
    CHECK(param_of({{"position", "centre"}}) == "position");
    CHECK(param_of({{"min_frequency", "0.5"}}).empty());
  }

  TEST_CASE("overlay blends the tint inside the mask") {
    RasterImage img(2, 1, Rgb{0, 0, 0});
    img.set(1, 0, Rgb{100, 100, 100});
    Bitmap b(2, 1);
    b.set(1, 0, true);
    const RasterImage out = RenderOverlay(img, RleEncode(b));
    CHECK(out.at(0, 0) == Rgb{0, 0, 0});
    CHECK(out.at(1, 0) == Rgb{178, 50, 50});
    CHECK_THROWS_AS(RenderOverlay(img, RleEncode(Bitmap(1, 1))), Error);
  }

  TEST_CASE("run listing and summary") {
    const ResultsApi api({Shared().run});
    CHECK(api.run_ids() == std::vector<std::string>{"wm"});
    const Json runs = Body(api.Get("/api/runs", {}));
    REQUIRE(runs.size() == 1);
    CHECK(runs[0]["run_id"] == "wm");
    CHECK(runs[0]["image_count"] == 40);
    CHECK(runs[0]["has_ground_truth"] == true);
    CHECK(runs[0]["labels"] == Json::array({"unrecognised", "watermark"}));
    CHECK(Body(api.Get("/api/runs/wm", {}))["evaluation_count"] == 44);
    CHECK(api.Get("/api/runs/nope", {}).status == 404);
    CHECK(api.Get("/api/other", {}).status == 404);
    CHECK(api.Get("/api/runs/wm/bogus", {}).status == 404);
  }

  TEST_CASE("cof endpoint") {
    const ResultsApi api({Shared().run});
    const ApiResponse r = api.Get("/api/runs/wm/cof", {{"mode", "conditional"}, {"min_support", "0"}});
    REQUIRE(r.status == 200);
    const Json j = Body(r);
    CHECK(j["rows"][0]["label"] == "watermark");
    CHECK(j["rows"][0]["frequency"] == 1.0);
    CHECK(j["rows"][0]["support"] == 4);
    const ApiResponse bad = api.Get("/api/runs/wm/cof", {{"top_k", "0"}});
    CHECK(bad.status == 400);
    CHECK(Body(bad)["parameter"] == "top_k");
    CHECK(Body(bad)["error"].is_string());
  }

  TEST_CASE("records pagination") {
    const ResultsApi api({Shared().run});
    int64_t seen = 0;
    std::vector<Json> all;
    for (int offset = 0; offset < 50; offset += 10) {
      const ApiResponse r =
          api.Get("/api/runs/wm/records", {{"offset", std::to_string(offset)}, {"limit", "10"}});
      REQUIRE(r.status == 200);
      const Json j = Body(r);
      CHECK(j["total"] == 44);
      CHECK(Header(r, "X-Total-Count") == "44");
      seen += static_cast<int64_t>(j["records"].size());
      for (const auto& rec : j["records"]) all.push_back(rec);
    }
    CHECK(seen == 44);
    CHECK(all.front()["image_id"] == "a_00000");
    // unstamped class-A images flip when the whole image is repainted
    CHECK(Body(api.Get("/api/runs/wm/records", {{"flipped", "true"}}))["total"] == 20);
    const Json flips =
        Body(api.Get("/api/runs/wm/records", {{"flipped", "true"}, {"label", "watermark"}}));
    CHECK(flips["total"] == 4);
    CHECK(Body(api.Get("/api/runs/wm/records", {}))["limit"] == 100);
    CHECK(api.Get("/api/runs/wm/records", {{"limit", "0"}}).status == 400);
    CHECK(api.Get("/api/runs/wm/records", {{"limit", "1001"}}).status == 400);
    CHECK(api.Get("/api/runs/wm/records", {{"offset", "-1"}}).status == 400);
    CHECK(Body(api.Get("/api/runs/wm/records", {{"sort", "x"}}))["parameter"] == "sort");
  }

  TEST_CASE("image endpoints serve stored bytes") {
    const ResultsApi api({Shared().run});
    const Json flips =
        Body(api.Get("/api/runs/wm/records", {{"flipped", "1"}, {"label", "watermark"}}));
    REQUIRE(flips["records"].size() == 4);
    const Json rec = flips["records"][0];
    const std::string id = rec["image_id"];
    const std::string seg = std::to_string(rec["segment_index"].get<int>());
    const std::string edit = rec["edit_id"];

    const ApiResponse orig = api.Get("/api/runs/wm/images/" + id + "/original", {});
    CHECK(orig.status == 200);
    CHECK(orig.content_type == "image/png");
    CHECK(orig.body == Slurp(Shared().data / "images" / (id + ".png")));

    const ApiResponse edited = api.Get("/api/runs/wm/images/" + id + "/edited/" + seg + "/" + edit, {});
    CHECK(edited.status == 200);
    CHECK(edited.body ==
          Slurp(ArtifactPath(Shared().run, id, rec["segment_index"].get<int>(), edit)));

    const ApiResponse overlay = api.Get("/api/runs/wm/images/" + id + "/overlay/" + seg, {});
    REQUIRE(overlay.status == 200);
    const std::vector<uint8_t> bytes(overlay.body.begin(), overlay.body.end());
    const LoadedRun run = LoadedRun::Load(Shared().run);
    CHECK(DecodePng(bytes) ==
          RenderOverlay(LoadPng(Shared().data / "images" / (id + ".png")),
                        run.segments.at(id).at(static_cast<std::size_t>(rec["segment_index"].get<int>()))));

    CHECK(api.Get("/api/runs/wm/images/" + id + "/overlay/9", {}).status == 404);
    CHECK(api.Get("/api/runs/wm/images/nope/original", {}).status == 404);
    // class-B images never flip, so nothing was persisted
    CHECK(api.Get("/api/runs/wm/images/b_00000/edited/0/fill", {}).status == 404);
  }

  TEST_CASE("construction errors") {
    CHECK_THROWS(ResultsApi(std::vector<fs::path>{}));
    CHECK_THROWS(ResultsApi({Shared().run, Shared().run}));
    TempDir empty;
    CHECK_THROWS(ResultsApi({empty.path()}));
  }

  TEST_CASE("http server mirrors the api") {
    auto api = std::make_shared<const ResultsApi>(std::vector<fs::path>{Shared().run});
    ResultsServer server(api);
    const int port = server.Bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.Listen(); });
    httplib::Client client("127.0.0.1", port);
    const auto res = client.Get("/api/runs/wm/cof?mode=share&top_k=3");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(Json::parse(res->body) ==
          Body(api->Get("/api/runs/wm/cof", {{"mode", "share"}, {"top_k", "3"}})));
    const auto rec = client.Get("/api/runs/wm/records?limit=5");
    REQUIRE(rec);
    CHECK(rec->get_header_value("X-Total-Count") == "44");
    const auto bad = client.Get("/api/runs/wm/cof?bogus=1");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    const auto opt = client.Options("/api/runs");
    REQUIRE(opt);
    CHECK(opt->status == 204);
    server.Stop();
    t.join();
  }
}
