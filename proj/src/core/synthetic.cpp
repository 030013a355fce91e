// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "spectra/error.hpp"
#include "spectra/random.hpp"

namespace spectra::synthetic {

namespace {

using Color = std::array<double, 3>;  // components in [0, 1]

Color hsvToRgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double sector = h * 6.0;
  const int i = static_cast<int>(sector) % 6;
  const double f = sector - std::floor(sector);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

std::array<double, 3> rgbToHsv(Color c) {
  const double mx = std::max({c[0], c[1], c[2]});
  const double mn = std::min({c[0], c[1], c[2]});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0) {
    if (mx == c[0]) h = std::fmod((c[1] - c[2]) / d + 6.0, 6.0);
    else if (mx == c[1]) h = (c[2] - c[0]) / d + 2.0;
    else h = (c[0] - c[1]) / d + 4.0;
    h /= 6.0;
  }
  return {h, mx > 0 ? d / mx : 0.0, mx};
}

}  // namespace

RgbImage texture(int width, int height, std::uint64_t seed) {
  if (width <= 0 || height <= 0) fail(ErrorCode::kInvalid, "texture: bad size");
  Rng rng(seed);
  std::vector<Color> canvas(static_cast<std::size_t>(width) * height);

  const double h0 = rng.uniform(), hx = rng.uniform(0.5, 1.5), hy = rng.uniform(0.2, 0.8);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width, v = static_cast<double>(y) / height;
      canvas[static_cast<std::size_t>(y) * width + x] =
          hsvToRgb(h0 + hx * u + hy * v * v, 0.35 + 0.3 * v, 0.45 + 0.35 * u);
    }
  }

  const int shapes = std::max(12, width * height / 90);
  const double minDim = std::min(width, height);
  for (int s = 0; s < shapes; ++s) {
    const Color color = hsvToRgb(rng.uniform(), rng.uniform(0.4, 1.0), rng.uniform(0.25, 1.0));
    const double cx = rng.uniform(0, width), cy = rng.uniform(0, height);
    const double rx = rng.uniform(0.02, 0.12) * minDim + 1.5;
    const double ry = rng.uniform(0.02, 0.12) * minDim + 1.5;
    const bool disc = rng.below(2) == 0;
    const int x0 = std::max(0, static_cast<int>(cx - rx)), x1 = std::min(width - 1, static_cast<int>(cx + rx));
    const int y0 = std::max(0, static_cast<int>(cy - ry)), y1 = std::min(height - 1, static_cast<int>(cy + ry));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        if (!disc || dx * dx + dy * dy <= 1.0) canvas[static_cast<std::size_t>(y) * width + x] = color;
      }
    }
  }

  // 3x3 binomial blur to soften aliasing.
  RgbImage out(width, height);
  constexpr double kKernel[3] = {0.25, 0.5, 0.25};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Color acc{0, 0, 0};
      for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
          const int xx = std::clamp(x + i, 0, width - 1), yy = std::clamp(y + j, 0, height - 1);
          const Color& c = canvas[static_cast<std::size_t>(yy) * width + xx];
          const double k = kKernel[i + 1] * kKernel[j + 1];
          for (int ch = 0; ch < 3; ++ch) acc[ch] += k * c[ch];
        }
      }
      out.setPixel(x, y, {static_cast<std::uint8_t>(std::lround(255.0 * acc[0])),
                          static_cast<std::uint8_t>(std::lround(255.0 * acc[1])),
                          static_cast<std::uint8_t>(std::lround(255.0 * acc[2]))});
    }
  }
  return out;
}

SpectralCube lift(const RgbImage& rgb, int bands, std::uint64_t seed) {
  if (bands < 1) fail(ErrorCode::kInvalid, "lift: bands must be positive");
  Rng rng(seed);
  std::vector<double> gain(bands);
  for (auto& g : gain) g = rng.uniform(0.8, 1.2);
  constexpr double kWidth = 0.12;

  std::vector<double> values;
  values.reserve(rgb.pixelCount() * bands);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      const Rgb p = rgb.pixel(x, y);
      const auto [h, s, v] = rgbToHsv({p[0] / 255.0, p[1] / 255.0, p[2] / 255.0});
      for (int b = 0; b < bands; ++b) {
        const double centre = (b + 0.5) / bands;
        double d = std::fabs(centre - h);
        d = std::min(d, 1.0 - d);
        const double bump = std::exp(-d * d / (2 * kWidth * kWidth));
        const double response = 0.3 + 0.7 * (s * bump + (1.0 - s) * 0.5);
        values.push_back(1000.0 * (0.02 + gain[b] * v * response));
      }
    }
  }
  std::vector<double> wavelengths(bands);
  for (int b = 0; b < bands; ++b) wavelengths[b] = 400.0 + 300.0 * (b + 0.5) / bands;
  return SpectralCube(rgb.width(), rgb.height(), bands, std::move(values), std::move(wavelengths));
}

ControlPointSet sampleAligned(const SpectralCube& cube, const RgbImage& rgb, double fraction,
                              std::uint64_t seed) {
  if (cube.width() != rgb.width() || cube.height() != rgb.height()) {
    fail(ErrorCode::kFormat, "sampleAligned: cube and image sizes differ");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorCode::kInvalid, "sampleAligned: bad fraction");
  const auto total = static_cast<std::uint64_t>(cube.pixelCount());
  const auto count = static_cast<std::uint64_t>(std::ceil(fraction * static_cast<double>(total)));
  Rng rng(seed);
  std::vector<ControlPair> pairs;
  for (std::uint64_t index : sampleWithoutReplacement(rng, total, count)) {
    const int x = static_cast<int>(index % cube.width()), y = static_cast<int>(index / cube.width());
    const auto sig = cube.signature(x, y);
    pairs.push_back({std::vector<double>(sig.begin(), sig.end()), rgb.pixel(x, y),
                     PixelCoord{x, y}, PixelCoord{x, y}});
  }
  return ControlPointSet(cube.bands(), std::move(pairs), "synthetic");
}

}  // namespace spectra::synthetic
