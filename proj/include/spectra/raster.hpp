// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spectra {

/// A width x height raster of p-band spectral signatures.
///
/// Values are stored band-interleaved-by-pixel so that a signature is a
/// contiguous span. Instances are immutable once built; the constructor
/// rejects non-finite or negative values, and wavelengths that are not
/// strictly increasing.
class SpectralCube {
 public:
  SpectralCube(int width, int height, int bands, std::vector<double> values,
               std::vector<double> wavelengths = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bands() const noexcept { return bands_; }
  std::size_t pixelCount() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  double at(int x, int y, int band) const {
    return values_[offset(x, y) + band];
  }
  std::span<const double> signature(int x, int y) const {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(bands_)};
  }
  std::span<const double> signature(std::size_t pixelIndex) const {
    return {values_.data() + pixelIndex * bands_,
            static_cast<std::size_t>(bands_)};
  }

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& wavelengths() const noexcept {
    return wavelengths_;
  }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const SpectralCube&, const SpectralCube&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * bands_;
  }

  int width_;
  int height_;
  int bands_;
  std::vector<double> values_;
  std::vector<double> wavelengths_;
};

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit, 3-channel interleaved raster.
class RgbImage {
 public:
  RgbImage(int width, int height, std::vector<std::uint8_t> values);
  RgbImage(int width, int height, Rgb fill = {0, 0, 0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixelCount() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  Rgb pixel(int x, int y) const {
    const std::size_t o = offset(x, y);
    return {values_[o], values_[o + 1], values_[o + 2]};
  }
  void setPixel(int x, int y, Rgb c) {
    const std::size_t o = offset(x, y);
    values_[o] = c[0];
    values_[o + 1] = c[1];
    values_[o + 2] = c[2];
  }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::span<std::uint8_t> mutableValues() noexcept { return values_; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> values_;
};

/// Single-channel real raster used for grayscale proxies and band images.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

/// Luminance in 8-bit levels, (299 R + 587 G + 114 B) / 1000 rounded to
/// nearest. Shared by the matcher's grayscale proxy and the entropy metric.
inline std::uint8_t luminance(Rgb c) noexcept {
  const unsigned y = 299u * c[0] + 587u * c[1] + 114u * c[2];
  return static_cast<std::uint8_t>((y + 500u) / 1000u);
}

/// Mean over bands.
GrayImage cubeProxy(const SpectralCube& cube);
/// Luminance of each pixel, in levels [0, 255].
GrayImage rgbProxy(const RgbImage& image);
/// One band as a grayscale image.
GrayImage bandImage(const SpectralCube& cube, int band);
/// Nearest-neighbour subsample taking every `stride`-th pixel in x and y.
SpectralCube downsample(const SpectralCube& cube, int stride);
RgbImage downsample(const RgbImage& image, int stride);
/// Gray image rescaled to [0, 255] by its min/max (constant images map to 0).
RgbImage toDisplay(const GrayImage& gray);

}  // namespace spectra
