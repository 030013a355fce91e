// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>

#include "spectra/error.hpp"
#include "spectra/io.hpp"
#include "spectra/preview/server.hpp"
#include "spectra/preview/session.hpp"
#include "spectra/synthetic.hpp"

// httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen; keep it last.
#include <httplib.h>
#include <json.hpp>

using namespace spectra;
using namespace spectra::preview;
using nlohmann::json;

namespace {

/// Cube with `bands` bands whose pixel (x, y) is nonzero except at `zero`.
SpectralCube patternCube(int w, int h, int bands, PixelCoord zero = {-1, -1}) {
  std::vector<double> values;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int b = 0; b < bands; ++b)
        values.push_back(x == zero.x && y == zero.y ? 0.0 : 1.0 + (x * 7 + y * 3 + b * 5) % 11);
  return SpectralCube(w, h, bands, std::move(values));
}

RgbImage gradient(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.setPixel(x, y, {static_cast<std::uint8_t>(x * 20), static_cast<std::uint8_t>(y * 30), 90});
  return img;
}

std::string text(std::span<const std::uint8_t> bytes) { return {bytes.begin(), bytes.end()}; }

/// Multipart fields for a uint8 band-sequential cube and a PNG image.
httplib::MultipartFormDataItems uploadItems(int w, int h, int bands, const std::vector<std::uint8_t>& raw,
                                            const RgbImage& rgb) {
  CubeHeader header;
  header.samples = w;
  header.lines = h;
  header.bands = bands;
  header.interleave = Interleave::kBsq;
  header.dataType = DataType::kUInt8;
  return {{"header", formatCubeHeader(header), "cube.hdr", "text/plain"},
          {"cube", text(raw), "cube.raw", "application/octet-stream"},
          {"rgb", text(encodePng(rgb)), "rgb.png", "image/png"}};
}

struct RunningServer {
  Server server;
  int port;
  std::thread thread;

  explicit RunningServer(ServerOptions options = {})
      : server([&] {
          options.port = 0;
          return options;
        }()),
        port(server.bind()),
        thread([this] { server.listen(); }) {
    server.waitUntilReady();
  }
  ~RunningServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

std::string createSession(httplib::Client& cli) {
  std::vector<std::uint8_t> raw(2 * 2 * 3);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::uint8_t>(10 + i);
  const auto res = cli.Post("/sessions", uploadItems(2, 2, 3, raw, gradient(2, 2)));
  REQUIRE(res);
  REQUIRE(res->status == 201);
  return json::parse(res->body)["id"].get<std::string>();
}

std::string pointBody(int hx, int hy, int rx, int ry) {
  return json{{"hsi", {hx, hy}}, {"rgb", {rx, ry}}}.dump();
}

}  // namespace

TEST_CASE("session: add, remove and list points") {
  Session s("a", patternCube(5, 4, 3, {2, 2}), gradient(6, 6), 1);
  CHECK(s.points().revision == 0);
  CHECK(s.points().pairs.empty());

  CHECK(s.addPoint({1, 1}, {3, 2}) == 1);
  const auto snap = s.points();
  REQUIRE(snap.pairs.size() == 1);
  CHECK(snap.pairs[0].v == Rgb{60, 60, 90});
  CHECK(snap.pairs[0].hsi->x == 1);
  CHECK(snap.pairs[0].rgb->y == 2);
  const auto sig = s.cube().signature(1, 1);
  CHECK(snap.pairs[0].u == std::vector<double>(sig.begin(), sig.end()));

  CHECK_THROWS_AS(s.addPoint({5, 0}, {0, 0}), Error);
  CHECK_THROWS_AS(s.addPoint({0, 0}, {0, 6}), Error);
  try {
    s.addPoint({2, 2}, {0, 0});
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalid);
    CHECK(std::string(e.what()).find("zero signature") != std::string::npos);
  }
  CHECK(s.points().revision == 1);

  CHECK(s.addPoint({0, 3}, {1, 1}) == 2);
  CHECK(s.removePoint(1) == 3);
  CHECK(s.points().pairs.size() == 1);
  CHECK_THROWS_AS(s.removePoint(-1), Error);
  CHECK_THROWS_AS(s.removePoint(1), Error);
  CHECK(s.points().revision == 3);
}

TEST_CASE("session: previews") {
  Session s("b", patternCube(8, 6, 4), gradient(8, 6), 2);
  CHECK(s.preview(std::nullopt).kind == PreviewResult::Kind::kNoControlPoints);
  CHECK_THROWS_AS(s.exportPoints(), Error);

  s.addPoint({3, 3}, {4, 2});
  const PreviewResult first = s.preview(std::nullopt);
  REQUIRE(first.kind == PreviewResult::Kind::kImage);
  CHECK(first.revision == 1);
  const RgbImage img = decodePng(first.png).image;
  CHECK(img.width() == 4);
  CHECK(img.height() == 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) CHECK(img.pixel(x, y) == Rgb{80, 60, 90});

  CHECK(s.preview(std::uint64_t{1}).kind == PreviewResult::Kind::kNotModified);
  CHECK(s.preview(std::uint64_t{0}).revision == 1);
  CHECK(s.renderCount() == 1);

  const ControlPointSet exported = parseControlPoints(s.exportPoints());
  CHECK(exported.size() == 1);
  s.addPoint({1, 1}, {0, 0});
  CHECK(parseControlPoints(s.exportPoints()).size() == 2);
}

TEST_CASE("session: fourteen pairs on an eighteen-band cube render") {
  const RgbImage rgb = synthetic::texture(48, 40, 4);
  Session s("c", synthetic::lift(rgb, 18, 2), rgb, 4);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> px(0, 47), py(0, 39);
  for (int i = 0; i < 14; ++i) {
    const int x = px(rng), y = py(rng);
    s.addPoint({x, y}, {x, y});
  }
  const PreviewResult result = s.preview(std::nullopt);
  REQUIRE(result.kind == PreviewResult::Kind::kImage);
  CHECK(result.revision == 14);
  const RgbImage img = decodePng(result.png).image;
  CHECK(img.width() == 12);
  CHECK(img.height() == 10);
}

TEST_CASE("session: concurrent previews share one render") {
  const RgbImage rgb = synthetic::texture(64, 64, 1);
  Session s("d", synthetic::lift(rgb, 8, 1), rgb, 1);
  for (int i = 0; i < 20; ++i) s.addPoint({i * 3, i * 2}, {i * 3, i * 2});
  std::vector<PreviewResult> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) threads.emplace_back([&, t] { results[t] = s.preview(std::nullopt); });
  for (auto& t : threads) t.join();
  CHECK(s.renderCount() == 1);
  for (const auto& r : results) {
    CHECK(r.revision == 20);
    CHECK(r.png == results[0].png);
  }
}

TEST_CASE("session: preview revision always matches its content") {
  const RgbImage rgb = synthetic::texture(32, 32, 2);
  const SpectralCube cube = synthetic::lift(rgb, 6, 3);
  Session s("e", cube, rgb, 2);
  std::vector<PixelCoord> clicks;
  for (int i = 0; i < 12; ++i) clicks.push_back({(i * 11) % 32, (i * 7) % 32});
  s.addPoint(clicks[0], clicks[0]);

  std::atomic<bool> done{false};
  std::vector<PreviewResult> seen;
  std::thread reader([&] {
    while (!done) seen.push_back(s.preview(std::nullopt));
    seen.push_back(s.preview(std::nullopt));
  });
  for (std::size_t i = 1; i < clicks.size(); ++i) {
    s.addPoint(clicks[i], clicks[i]);
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  done = true;
  reader.join();

  REQUIRE(!seen.empty());
  CHECK(seen.back().revision == clicks.size());
  std::map<std::uint64_t, std::vector<std::uint8_t>> expected;
  for (const auto& r : seen) {
    REQUIRE(r.kind == PreviewResult::Kind::kImage);
    REQUIRE(r.revision >= 1);
    REQUIRE(r.revision <= clicks.size());
    auto& png = expected[r.revision];
    if (png.empty()) {
      std::vector<ControlPair> pairs;
      for (std::size_t i = 0; i < r.revision; ++i) {
        const auto sig = cube.signature(clicks[i].x, clicks[i].y);
        pairs.push_back({std::vector<double>(sig.begin(), sig.end()), rgb.pixel(clicks[i].x, clicks[i].y),
                         clicks[i], clicks[i]});
      }
      png = encodePng(render(downsample(cube, 2), ControlPointSet(6, pairs), MlsConfig{}));
    }
    CHECK(r.png == png);
  }
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1].revision <= seen[i].revision);
}

TEST_CASE("session store: ids, isolation and idle expiry") {
  auto now = std::chrono::steady_clock::time_point{};
  SessionStore store(std::chrono::minutes(30), [&] { return now; });
  const auto a = store.create(patternCube(3, 3, 2), gradient(3, 3));
  const auto b = store.create(patternCube(3, 3, 2), gradient(3, 3));
  CHECK(a->id() != b->id());
  CHECK(a->previewStride() == 4);
  a->addPoint({0, 0}, {0, 0});
  CHECK(b->points().pairs.empty());
  CHECK(store.get(a->id()) == a);

  now += std::chrono::minutes(20);
  store.get(a->id());
  now += std::chrono::minutes(20);
  CHECK(store.get(a->id()) == a);
  CHECK_THROWS_AS(store.get(b->id()), Error);
  CHECK(store.size() == 1);
  CHECK(store.remove(a->id()));
  CHECK_FALSE(store.remove(a->id()));
  CHECK_THROWS_AS(store.create(patternCube(3, 3, 2), gradient(3, 3), 0), Error);
}

TEST_CASE("http: session lifecycle") {
  RunningServer srv;
  auto cli = srv.client();
  const std::string id = createSession(cli);
  const std::string other = createSession(cli);
  CHECK(id != other);
  const std::string base = "/sessions/" + id;

  auto res = cli.Get(base + "/points");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto body = json::parse(res->body);
  CHECK(body["revision"] == 0);
  CHECK(body["points"]["pairs"].empty());
  CHECK(body["points"]["bands"] == 3);

  res = cli.Get(base + "/preview");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["placeholder"]["code"] == "no_control_points");

  res = cli.Get(base + "/export");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["code"] == "invalid");

  res = cli.Post(base + "/points", pointBody(1, 0, 1, 1), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(json::parse(res->body)["revision"] == 1);
  CHECK(json::parse(res->body)["count"] == 1);

  res = cli.Post(base + "/points", pointBody(2, 0, 0, 0), "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["code"] == "out_of_bounds");

  res = cli.Post(base + "/points", "{\"hsi\": [0]}", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = cli.Post(base + "/points", "not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = cli.Get(base + "/preview");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "image/png");
  CHECK(res->get_header_value("X-Revision") == "1");
  const RgbImage img = decodePng(std::span(reinterpret_cast<const std::uint8_t*>(res->body.data()),
                                           res->body.size()))
                           .image;
  CHECK(img.pixel(0, 0) == Rgb{20, 30, 90});

  res = cli.Get(base + "/preview?since=1");
  REQUIRE(res);
  CHECK(res->status == 304);
  CHECK(res->get_header_value("X-Revision") == "1");
  res = cli.Get(base + "/preview?since=abc");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = cli.Get(base + "/export");
  REQUIRE(res);
  CHECK(res->status == 200);
  const ControlPointSet exported = parseControlPoints(res->body);
  REQUIRE(exported.size() == 1);
  CHECK(exported[0].v == Rgb{20, 30, 90});
  CHECK(res->body == formatControlPoints(exported));

  res = cli.Delete(base + "/points/-1");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = cli.Delete(base + "/points/0");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["revision"] == 2);
  CHECK(json::parse(res->body)["count"] == 0);

  res = cli.Get("/sessions/" + other + "/points");
  REQUIRE(res);
  CHECK(json::parse(res->body)["revision"] == 0);

  for (const char* image : {"/hsi.png", "/rgb.png"}) {
    res = cli.Get(base + image);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/png");
  }

  res = cli.Delete(base);
  REQUIRE(res);
  CHECK(res->status == 204);
  res = cli.Get(base + "/points");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body)["error"]["code"] == "not_found");
}

TEST_CASE("http: upload errors") {
  RunningServer srv;
  auto cli = srv.client();
  std::vector<std::uint8_t> shortRaw(5, 1);
  auto res = cli.Post("/sessions", uploadItems(2, 2, 3, shortRaw, gradient(2, 2)));
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["message"].get<std::string>().find("short data file") !=
        std::string::npos);

  auto items = uploadItems(2, 2, 3, std::vector<std::uint8_t>(12, 1), gradient(2, 2));
  items.pop_back();
  res = cli.Post("/sessions", items);
  REQUIRE(res);
  CHECK(res->status == 400);

  items = uploadItems(2, 2, 3, std::vector<std::uint8_t>(12, 1), gradient(2, 2));
  items.back().content = "not an image";
  res = cli.Post("/sessions", items);
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["code"] == "format");
  CHECK(srv.server.store().size() == 0);
}

TEST_CASE("http: zero-signature click is rejected") {
  RunningServer srv;
  auto cli = srv.client();
  std::vector<std::uint8_t> raw(2 * 2 * 2, 4);
  raw[0] = raw[4] = 0;  // pixel (0, 0) in both bands
  const auto created = cli.Post("/sessions", uploadItems(2, 2, 2, raw, gradient(2, 2)));
  REQUIRE(created);
  const std::string id = json::parse(created->body)["id"];
  const auto res = cli.Post("/sessions/" + id + "/points", pointBody(0, 0, 0, 0), "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["message"].get<std::string>().find("zero signature") !=
        std::string::npos);
}
