// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spectra/control_points.hpp"
#include "spectra/mls.hpp"
#include "spectra/raster.hpp"

namespace spectra::preview {

struct PointsSnapshot {
  std::uint64_t revision = 0;
  int bands = 0;
  std::vector<ControlPair> pairs;
};

struct PreviewResult {
  enum class Kind { kImage, kNotModified, kNoControlPoints };
  Kind kind = Kind::kImage;
  std::uint64_t revision = 0;  // revision the image was rendered from
  std::vector<std::uint8_t> png;
};

/// One cube + reference image with an editable control-point list. Point
/// edits serialize on the session; previews render outside the lock and
/// coalesce: concurrent requests share one in-flight render, and only the
/// newest revision is rendered next.
class Session {
 public:
  Session(std::string id, SpectralCube cube, RgbImage reference, int previewStride,
          MlsConfig config = {});

  const std::string& id() const noexcept { return id_; }
  const SpectralCube& cube() const noexcept { return cube_; }
  const RgbImage& reference() const noexcept { return reference_; }
  int previewStride() const noexcept { return stride_; }

  /// Appends (signature at hsi, reference color at rgb). Throws
  /// Error(kOutOfBounds) for coordinates outside either image and
  /// Error(kInvalid) for an all-zero signature.
  std::uint64_t addPoint(PixelCoord hsi, PixelCoord rgb);
  /// Throws Error(kOutOfBounds) for an invalid index.
  std::uint64_t removePoint(long long index);
  PointsSnapshot points() const;
  /// Throws Error(kInvalid) when there are no points.
  std::string exportPoints() const;

  /// Not-modified when `since` equals the current revision; a placeholder
  /// when there are no points; otherwise a PNG tagged with the revision it
  /// was rendered from.
  PreviewResult preview(std::optional<std::uint64_t> since);

  /// Number of renders actually performed.
  std::size_t renderCount() const;

 private:
  const std::string id_;
  const SpectralCube cube_;
  const SpectralCube previewCube_;
  const RgbImage reference_;
  const int stride_;
  const MlsConfig config_;

  mutable std::mutex mutex_;
  std::condition_variable rendered_;
  std::vector<ControlPair> pairs_;
  std::uint64_t revision_ = 0;
  bool rendering_ = false;
  std::optional<PreviewResult> cached_;
  std::size_t renders_ = 0;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

/// Thread-safe id -> session map with idle expiry, checked on every access.
class SessionStore {
 public:
  explicit SessionStore(std::chrono::steady_clock::duration idleTimeout = std::chrono::minutes(30),
                        Clock clock = std::chrono::steady_clock::now);

  std::shared_ptr<Session> create(SpectralCube cube, RgbImage reference, int previewStride = 4);
  /// Throws Error(kNotFound) for unknown or expired ids.
  std::shared_ptr<Session> get(const std::string& id);
  bool remove(const std::string& id);
  std::size_t size();

 private:
  struct Entry {
    std::shared_ptr<Session> session;
    std::chrono::steady_clock::time_point lastUsed;
  };
  void expireLocked(std::chrono::steady_clock::time_point now);
  std::string newIdLocked();

  std::mutex mutex_;
  std::map<std::string, Entry> sessions_;
  std::chrono::steady_clock::duration idleTimeout_;
  Clock clock_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_;
};

}  // namespace spectra::preview
