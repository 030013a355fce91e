// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spectra/homography.hpp"
#include "spectra/raster.hpp"

namespace spectra {

struct MetricReport {
  double entropyBits = 0.0;
  std::optional<double> rmse;
  std::size_t pixelCount = 0;  // pixels entering the RMSE (all pixels without a reference)
};

/// Shannon entropy in bits of the 256-bin luminance histogram.
/// Throws Error(kInvalid) for an empty image.
double entropy(const RgbImage& image);

/// Root mean square difference over all pixels and channels, in 8-bit levels.
/// Throws Error(kInvalid) on a dimension mismatch or empty images.
double rmse(const RgbImage& a, const RgbImage& b);

/// Same as rmse, restricted to pixels whose mask entry is nonzero.
/// Throws Error(kInvalid) when the mask selects nothing.
double rmse(const RgbImage& a, const RgbImage& b, const std::vector<std::uint8_t>& mask);

struct WarpedImage {
  RgbImage image;
  std::vector<std::uint8_t> valid;  // row-major, 1 where the source was sampled
};

/// Resamples `source` onto a width x height grid: output pixel p takes the
/// nearest source pixel to H * p. Pixels mapping outside the source are
/// black and marked invalid.
WarpedImage warpToFrame(const RgbImage& source, const Homography& h, int width, int height);

MetricReport measure(const RgbImage& image);
MetricReport measure(const RgbImage& image, const RgbImage& reference);
/// Reference is first warped into the frame of `image` by `h`, which maps
/// image pixels to reference pixels; only valid pixels enter the RMSE.
MetricReport measure(const RgbImage& image, const RgbImage& reference, const Homography& h);

/// JSON object: {"entropy_bits", "rmse" (null when absent), "pixel_count"}.
std::string formatMetricReport(const MetricReport& report);

}  // namespace spectra
