// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spectra/control_points.hpp"
#include "spectra/error.hpp"

namespace spectra {

namespace {

void checkDims(int width, int height, const char* what) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::kFormat, std::string(what) + ": dimensions must be positive, got " +
                                 std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

SpectralCube::SpectralCube(int width, int height, int bands,
                           std::vector<double> values,
                           std::vector<double> wavelengths)
    : width_(width),
      height_(height),
      bands_(bands),
      values_(std::move(values)),
      wavelengths_(std::move(wavelengths)) {
  checkDims(width, height, "cube");
  if (bands <= 0) fail(ErrorCode::kFormat, "cube: band count must be positive");
  const std::size_t expected = static_cast<std::size_t>(width) * height * bands;
  if (values_.size() != expected) {
    fail(ErrorCode::kFormat, "cube: expected " + std::to_string(expected) +
                                 " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorCode::kFormat, "cube: values must be finite and non-negative");
    }
  }
  if (!wavelengths_.empty()) {
    if (wavelengths_.size() != static_cast<std::size_t>(bands)) {
      fail(ErrorCode::kFormat, "cube: wavelength count differs from band count");
    }
    for (std::size_t i = 1; i < wavelengths_.size(); ++i) {
      if (!(wavelengths_[i] > wavelengths_[i - 1])) {
        fail(ErrorCode::kFormat, "cube: wavelengths must be strictly increasing");
      }
    }
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  checkDims(width, height, "rgb image");
  if (values_.size() != static_cast<std::size_t>(width) * height * 3) {
    fail(ErrorCode::kFormat, "rgb image: value count differs from width*height*3");
  }
}

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  checkDims(width, height, "rgb image");
  values_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < values_.size(); i += 3) {
    values_[i] = fill[0];
    values_[i + 1] = fill[1];
    values_[i + 2] = fill[2];
  }
}

GrayImage cubeProxy(const SpectralCube& cube) {
  GrayImage out(cube.width(), cube.height());
  for (std::size_t i = 0; i < cube.pixelCount(); ++i) {
    double sum = 0.0;
    for (double v : cube.signature(i)) sum += v;
    out.values[i] = static_cast<float>(sum / cube.bands());
  }
  return out;
}

GrayImage rgbProxy(const RgbImage& image) {
  GrayImage out(image.width(), image.height());
  const auto v = image.values();
  for (std::size_t i = 0; i < image.pixelCount(); ++i) {
    out.values[i] = luminance({v[3 * i], v[3 * i + 1], v[3 * i + 2]});
  }
  return out;
}

GrayImage bandImage(const SpectralCube& cube, int band) {
  if (band < 0 || band >= cube.bands()) {
    fail(ErrorCode::kInvalid, "band index out of range");
  }
  GrayImage out(cube.width(), cube.height());
  for (std::size_t i = 0; i < cube.pixelCount(); ++i) {
    out.values[i] = static_cast<float>(cube.signature(i)[band]);
  }
  return out;
}

SpectralCube downsample(const SpectralCube& cube, int stride) {
  if (stride < 1) fail(ErrorCode::kInvalid, "stride must be >= 1");
  if (stride == 1) return cube;
  const int w = (cube.width() + stride - 1) / stride;
  const int h = (cube.height() + stride - 1) / stride;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(w) * h * cube.bands());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto s = cube.signature(x * stride, y * stride);
      values.insert(values.end(), s.begin(), s.end());
    }
  }
  return SpectralCube(w, h, cube.bands(), std::move(values), cube.wavelengths());
}

RgbImage downsample(const RgbImage& image, int stride) {
  if (stride < 1) fail(ErrorCode::kInvalid, "stride must be >= 1");
  if (stride == 1) return image;
  const int w = (image.width() + stride - 1) / stride;
  const int h = (image.height() + stride - 1) / stride;
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.setPixel(x, y, image.pixel(x * stride, y * stride));
  }
  return out;
}

RgbImage toDisplay(const GrayImage& gray) {
  const auto [lo, hi] = std::minmax_element(gray.values.begin(), gray.values.end());
  const float range = *hi - *lo;
  RgbImage out(gray.width, gray.height);
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      const float t = range > 0.0f ? (gray.at(x, y) - *lo) / range : 0.0f;
      const auto level = static_cast<std::uint8_t>(std::lround(t * 255.0f));
      out.setPixel(x, y, {level, level, level});
    }
  }
  return out;
}

void validatePair(const ControlPair& pair, int bands) {
  if (pair.u.size() != static_cast<std::size_t>(bands)) {
    fail(ErrorCode::kFormat, "control pair: signature has " +
                                 std::to_string(pair.u.size()) + " entries but bands = " +
                                 std::to_string(bands));
  }
  bool nonzero = false;
  for (double x : pair.u) {
    if (!std::isfinite(x)) fail(ErrorCode::kFormat, "control pair: non-finite signature value");
    nonzero = nonzero || x != 0.0;
  }
  if (!nonzero) {
    fail(ErrorCode::kInvalid,
         "control pair: zero signature (spectral angle is undefined for a zero vector)");
  }
}

ControlPointSet::ControlPointSet(int bands, std::vector<ControlPair> pairs,
                                 std::string sensorTag)
    : bands_(bands), pairs_(std::move(pairs)), sensorTag_(std::move(sensorTag)) {
  if (bands <= 0) fail(ErrorCode::kFormat, "control points: bands must be positive");
  if (pairs_.empty()) fail(ErrorCode::kInvalid, "control points: at least one pair required");
  for (const auto& p : pairs_) validatePair(p, bands);
}

}  // namespace spectra
