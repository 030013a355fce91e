// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "spectra/error.hpp"

namespace spectra {

double entropy(const RgbImage& image) {
  const std::size_t count = static_cast<std::size_t>(image.width()) * image.height();
  if (count == 0) fail(ErrorCode::kInvalid, "entropy of an empty image");
  std::array<std::size_t, 256> histogram{};
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) ++histogram[luminance(image.pixel(x, y))];
  double bits = 0.0;
  for (std::size_t c : histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(count);
    bits -= p * std::log2(p);
  }
  return bits == 0.0 ? 0.0 : bits;
}

namespace {

void requireSameSize(const RgbImage& a, const RgbImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    fail(ErrorCode::kInvalid, "size mismatch: " + std::to_string(a.width()) + "x" +
                                  std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                  "x" + std::to_string(b.height()));
  }
}

double rmseImpl(const RgbImage& a, const RgbImage& b, const std::uint8_t* mask) {
  requireSameSize(a, b);
  const auto va = a.values();
  const auto vb = b.values();
  std::uint64_t sum = 0;
  std::uint64_t samples = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (mask != nullptr && mask[i / 3] == 0) continue;
    const std::int64_t d = static_cast<std::int64_t>(va[i]) - vb[i];
    sum += static_cast<std::uint64_t>(d * d);
    ++samples;
  }
  if (samples == 0) fail(ErrorCode::kInvalid, "rmse over zero pixels");
  return std::sqrt(static_cast<double>(sum) / static_cast<double>(samples));
}

}  // namespace

double rmse(const RgbImage& a, const RgbImage& b) { return rmseImpl(a, b, nullptr); }

double rmse(const RgbImage& a, const RgbImage& b, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != static_cast<std::size_t>(a.width()) * a.height()) {
    fail(ErrorCode::kInvalid, "mask size does not match the image");
  }
  return rmseImpl(a, b, mask.data());
}

WarpedImage warpToFrame(const RgbImage& source, const Homography& h, int width, int height) {
  WarpedImage out{RgbImage(width, height), std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector2d q = h.apply(Eigen::Vector2d(x, y));
      if (!std::isfinite(q.x()) || !std::isfinite(q.y())) continue;
      const double rx = std::round(q.x()), ry = std::round(q.y());
      if (rx < 0 || ry < 0 || rx >= source.width() || ry >= source.height()) continue;
      out.image.setPixel(x, y, source.pixel(static_cast<int>(rx), static_cast<int>(ry)));
      out.valid[static_cast<std::size_t>(y) * width + x] = 1;
    }
  }
  return out;
}

MetricReport measure(const RgbImage& image) {
  return {entropy(image), std::nullopt, static_cast<std::size_t>(image.width()) * image.height()};
}

MetricReport measure(const RgbImage& image, const RgbImage& reference) {
  return {entropy(image), rmse(image, reference),
          static_cast<std::size_t>(image.width()) * image.height()};
}

MetricReport measure(const RgbImage& image, const RgbImage& reference, const Homography& h) {
  const WarpedImage warped = warpToFrame(reference, h, image.width(), image.height());
  std::size_t valid = 0;
  for (std::uint8_t v : warped.valid) valid += v;
  return {entropy(image), rmse(image, warped.image, warped.valid), valid};
}

std::string formatMetricReport(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["entropy_bits"] = report.entropyBits;
  j["rmse"] = report.rmse ? nlohmann::ordered_json(*report.rmse) : nlohmann::ordered_json(nullptr);
  j["pixel_count"] = report.pixelCount;
  return j.dump(2) + "\n";
}

}  // namespace spectra
