// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/preview/server.hpp"

#include <charconv>
#include <span>

#include <httplib.h>
#include <json.hpp>

#include "spectra/error.hpp"
#include "spectra/io.hpp"

namespace spectra::preview {

using json = nlohmann::ordered_json;

namespace {

int httpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
    case ErrorCode::kInvalid:
    case ErrorCode::kOutOfBounds: return 400;
    case ErrorCode::kSingular:
    case ErrorCode::kEstimation: return 422;
    case ErrorCode::kInternal: break;
  }
  return 500;
}

void sendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void sendError(httplib::Response& res, ErrorCode code, const std::string& message) {
  sendJson(res, httpStatus(code),
           json{{"error", json{{"code", errorCodeName(code)}, {"message", message}}}});
}

std::span<const std::uint8_t> bytesOf(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void sendPng(httplib::Response& res, const std::vector<std::uint8_t>& png) {
  res.status = 200;
  res.set_content(std::string(png.begin(), png.end()), "image/png");
}

long long parseInteger(const std::string& text, const char* what) {
  long long value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    fail(ErrorCode::kInvalid, std::string(what) + " must be an integer, got '" + text + "'");
  }
  return value;
}

PixelCoord coordField(const json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
      !(*it)[1].is_number_integer()) {
    fail(ErrorCode::kInvalid, std::string("'") + name + "' must be an [x, y] integer pair");
  }
  return {(*it)[0].get<int>(), (*it)[1].get<int>()};
}

const std::string& formField(const httplib::Request& req, const char* name) {
  if (!req.has_file(name)) {
    fail(ErrorCode::kInvalid, std::string("missing multipart field '") + name + "'");
  }
  return req.files.find(name)->second.content;
}

json pointsJson(const PointsSnapshot& snap) {
  return json{{"revision", snap.revision},
              {"count", snap.pairs.size()},
              {"points", json::parse(formatControlPairs(snap.bands, {}, snap.pairs))}};
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions o)
      : options(std::move(o)), store(options.idleTimeout) {}

  ServerOptions options;
  SessionStore store;
  httplib::Server http;
  bool bound = false;

  /// Runs a handler, translating exceptions into JSON error responses.
  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        sendError(res, e.code(), e.what());
      } catch (const json::exception& e) {
        sendError(res, ErrorCode::kInvalid, std::string("malformed JSON body: ") + e.what());
      } catch (const std::exception& e) {
        sendError(res, ErrorCode::kInternal, e.what());
      }
    };
  }

  void routes();
};

void Server::Impl::routes() {
  http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const CubeHeader header = parseCubeHeader(formField(req, "header"));
    SpectralCube cube = decodeCube(header, bytesOf(formField(req, "cube")));
    RgbReadResult rgb = decodePng(bytesOf(formField(req, "rgb")));
    int stride = options.previewStride;
    if (req.has_file("stride")) {
      stride = static_cast<int>(parseInteger(req.files.find("stride")->second.content, "stride"));
    }
    const auto session = store.create(std::move(cube), std::move(rgb.image), stride);
    const SpectralCube& c = session->cube();
    sendJson(res, 201,
             json{{"id", session->id()},
                  {"revision", 0},
                  {"cube", {{"width", c.width()}, {"height", c.height()}, {"bands", c.bands()}}},
                  {"rgb",
                   {{"width", session->reference().width()},
                    {"height", session->reference().height()}}},
                  {"preview_stride", session->previewStride()},
                  {"warnings", rgb.warnings}});
  }));

  http.Get("/sessions/:id/hsi.png", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto session = store.get(req.path_params.at("id"));
    sendPng(res, encodePng(toDisplay(cubeProxy(session->cube()))));
  }));

  http.Get("/sessions/:id/rgb.png", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto session = store.get(req.path_params.at("id"));
    sendPng(res, encodePng(session->reference()));
  }));

  http.Get("/sessions/:id/points", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto session = store.get(req.path_params.at("id"));
    sendJson(res, 200, pointsJson(session->points()));
  }));

  http.Post("/sessions/:id/points", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto session = store.get(req.path_params.at("id"));
    const json body = json::parse(req.body);
    if (!body.is_object()) fail(ErrorCode::kInvalid, "body must be a JSON object");
    const std::uint64_t revision = session->addPoint(coordField(body, "hsi"), coordField(body, "rgb"));
    const PointsSnapshot snap = session->points();
    sendJson(res, 201, json{{"revision", revision}, {"count", snap.pairs.size()}});
  }));

  http.Delete("/sessions/:id/points/:index",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto session = store.get(req.path_params.at("id"));
                const long long index = parseInteger(req.path_params.at("index"), "index");
                const std::uint64_t revision = session->removePoint(index);
                sendJson(res, 200, json{{"revision", revision}, {"count", session->points().pairs.size()}});
              }));

  http.Get("/sessions/:id/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto session = store.get(req.path_params.at("id"));
    std::optional<std::uint64_t> since;
    if (req.has_param("since")) {
      const long long value = parseInteger(req.get_param_value("since"), "since");
      if (value < 0) fail(ErrorCode::kInvalid, "since must be >= 0");
      since = static_cast<std::uint64_t>(value);
    }
    const PreviewResult result = session->preview(since);
    res.set_header("X-Revision", std::to_string(result.revision));
    switch (result.kind) {
      case PreviewResult::Kind::kNotModified:
        res.status = 304;
        break;
      case PreviewResult::Kind::kNoControlPoints:
        sendJson(res, 200,
                 json{{"revision", result.revision},
                      {"placeholder",
                       {{"code", "no_control_points"},
                        {"message", "add at least one control point to render a preview"}}}});
        break;
      case PreviewResult::Kind::kImage:
        sendPng(res, result.png);
        break;
    }
  }));

  http.Get("/sessions/:id/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto session = store.get(req.path_params.at("id"));
    res.status = 200;
    res.set_header("Content-Disposition", "attachment; filename=\"control_points.json\"");
    res.set_content(session->exportPoints(), "application/json");
  }));

  http.Delete("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!store.remove(req.path_params.at("id"))) {
      fail(ErrorCode::kNotFound, "unknown session '" + req.path_params.at("id") + "'");
    }
    res.status = 204;
  }));

  if (!options.staticDir.empty() && !http.set_mount_point("/", options.staticDir)) {
    fail(ErrorCode::kIo, "static directory not found: " + options.staticDir);
  }
}

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (impl_->options.previewStride < 1) fail(ErrorCode::kInvalid, "preview stride must be >= 1");
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->bound) return impl_->options.port;
  const auto& host = impl_->options.host;
  int port = impl_->options.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(host);
    if (port < 0) fail(ErrorCode::kIo, "cannot bind " + host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->options.port = port;
  impl_->bound = true;
  return port;
}

void Server::listen() {
  bind();
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

void Server::waitUntilReady() const { impl_->http.wait_until_ready(); }

SessionStore& Server::store() { return impl_->store; }

}  // namespace spectra::preview
