// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/preview/session.hpp"

#include <cstdio>
#include <random>

#include "spectra/error.hpp"
#include "spectra/io.hpp"

namespace spectra::preview {

namespace {

std::string coordText(PixelCoord p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Session::Session(std::string id, SpectralCube cube, RgbImage reference, int previewStride,
                 MlsConfig config)
    : id_(std::move(id)),
      cube_(std::move(cube)),
      previewCube_(downsample(cube_, previewStride)),
      reference_(std::move(reference)),
      stride_(previewStride),
      config_(config) {
  config_.validate();
}

std::uint64_t Session::addPoint(PixelCoord hsi, PixelCoord rgb) {
  if (!cube_.contains(hsi.x, hsi.y)) {
    fail(ErrorCode::kOutOfBounds, "hsi coordinate " + coordText(hsi) + " outside the " +
                                      std::to_string(cube_.width()) + "x" +
                                      std::to_string(cube_.height()) + " cube");
  }
  if (!reference_.contains(rgb.x, rgb.y)) {
    fail(ErrorCode::kOutOfBounds, "rgb coordinate " + coordText(rgb) + " outside the " +
                                      std::to_string(reference_.width()) + "x" +
                                      std::to_string(reference_.height()) + " image");
  }
  const auto sig = cube_.signature(hsi.x, hsi.y);
  bool nonzero = false;
  for (double v : sig) nonzero = nonzero || v != 0.0;
  if (!nonzero) {
    fail(ErrorCode::kInvalid, "zero signature at " + coordText(hsi) +
                                  ": the spectral angle is undefined for an all-zero spectrum");
  }
  ControlPair pair{std::vector<double>(sig.begin(), sig.end()), reference_.pixel(rgb.x, rgb.y),
                   hsi, rgb};
  std::lock_guard lock(mutex_);
  pairs_.push_back(std::move(pair));
  return ++revision_;
}

std::uint64_t Session::removePoint(long long index) {
  std::lock_guard lock(mutex_);
  if (index < 0 || static_cast<std::size_t>(index) >= pairs_.size()) {
    fail(ErrorCode::kOutOfBounds, "point index " + std::to_string(index) + " out of range [0, " +
                                      std::to_string(pairs_.size()) + ")");
  }
  pairs_.erase(pairs_.begin() + static_cast<std::ptrdiff_t>(index));
  return ++revision_;
}

PointsSnapshot Session::points() const {
  std::lock_guard lock(mutex_);
  return {revision_, cube_.bands(), pairs_};
}

std::string Session::exportPoints() const {
  const PointsSnapshot snap = points();
  if (snap.pairs.empty()) fail(ErrorCode::kInvalid, "no control points to export");
  return formatControlPoints(ControlPointSet(snap.bands, snap.pairs));
}

PreviewResult Session::preview(std::optional<std::uint64_t> since) {
  std::unique_lock lock(mutex_);
  const std::uint64_t wanted = revision_;
  if (since && *since == wanted) return {PreviewResult::Kind::kNotModified, wanted, {}};
  if (pairs_.empty()) return {PreviewResult::Kind::kNoControlPoints, wanted, {}};

  for (;;) {
    if (cached_ && cached_->revision >= wanted) return *cached_;
    if (!rendering_) break;
    rendered_.wait(lock);
  }

  rendering_ = true;
  const std::uint64_t revision = revision_;
  const ControlPointSet set(cube_.bands(), pairs_);
  lock.unlock();
  PreviewResult result{PreviewResult::Kind::kImage, revision, {}};
  try {
    result.png = encodePng(render(previewCube_, set, config_));
  } catch (...) {
    lock.lock();
    rendering_ = false;
    rendered_.notify_all();
    throw;
  }
  lock.lock();
  ++renders_;
  if (!cached_ || cached_->revision < revision) cached_ = result;
  rendering_ = false;
  rendered_.notify_all();
  return result;
}

std::size_t Session::renderCount() const {
  std::lock_guard lock(mutex_);
  return renders_;
}

SessionStore::SessionStore(std::chrono::steady_clock::duration idleTimeout, Clock clock)
    : idleTimeout_(idleTimeout), clock_(std::move(clock)), salt_(std::random_device{}()) {
  salt_ = (salt_ << 32) ^ std::random_device{}();
}

void SessionStore::expireLocked(std::chrono::steady_clock::time_point now) {
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.lastUsed > idleTimeout_) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::string SessionStore::newIdLocked() {
  for (;;) {
    char buf[33];
    const std::uint64_t a = splitmix64(salt_ + 2 * counter_);
    const std::uint64_t b = splitmix64(salt_ + 2 * counter_ + 1);
    ++counter_;
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    if (sessions_.find(buf) == sessions_.end()) return buf;
  }
}

std::shared_ptr<Session> SessionStore::create(SpectralCube cube, RgbImage reference,
                                              int previewStride) {
  if (previewStride < 1) fail(ErrorCode::kInvalid, "preview stride must be >= 1");
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = newIdLocked();
    sessions_[id] = Entry{nullptr, clock_()};
  }
  try {
    auto session =
        std::make_shared<Session>(id, std::move(cube), std::move(reference), previewStride);
    std::lock_guard lock(mutex_);
    sessions_[id] = Entry{session, clock_()};
    return session;
  } catch (...) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
    throw;
  }
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  expireLocked(now);
  const auto it = sessions_.find(id);
  if (it == sessions_.end() || it->second.session == nullptr) {
    fail(ErrorCode::kNotFound, "unknown session '" + id + "'");
  }
  it->second.lastUsed = now;
  return it->second.session;
}

bool SessionStore::remove(const std::string& id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(id) > 0;
}

std::size_t SessionStore::size() {
  std::lock_guard lock(mutex_);
  expireLocked(clock_());
  return sessions_.size();
}

}  // namespace spectra::preview
