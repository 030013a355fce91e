// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "spectra/preview/session.hpp"

namespace spectra::preview {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int previewStride = 4;
  std::chrono::steady_clock::duration idleTimeout = std::chrono::minutes(30);
  std::string staticDir;  // served at / when non-empty
};

/// HTTP front end over a SessionStore.
///
///   POST   /sessions                      multipart: header, cube, rgb [, stride]
///   GET    /sessions/{id}/hsi.png         band-mean proxy of the cube
///   GET    /sessions/{id}/rgb.png         reference image
///   GET    /sessions/{id}/points          {"revision", "points"}
///   POST   /sessions/{id}/points          {"hsi": [x, y], "rgb": [x, y]}
///   DELETE /sessions/{id}/points/{index}
///   GET    /sessions/{id}/preview[?since=r]
///   GET    /sessions/{id}/export
///   DELETE /sessions/{id}
///
/// Errors are {"error": {"code", "message"}} with a 4xx/5xx status.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and returns the bound port. Throws
  /// Error(kIo) when the address is unavailable.
  int bind();
  /// Serves until stop() is called. Binds first when needed.
  void listen();
  void stop();
  /// Blocks until the server accepts connections.
  void waitUntilReady() const;

  SessionStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spectra::preview
