// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "spectra/control_points.hpp"
#include "spectra/raster.hpp"

namespace spectra::synthetic {

/// Colored, textured test scene: a smooth hue gradient overlaid with
/// random rectangles and discs, lightly blurred. Deterministic in `seed`.
RgbImage texture(int width, int height, std::uint64_t seed);

/// Nonlinear spectral lift of an RGB image: every pixel becomes a band
/// profile with a Gaussian bump whose position follows hue, whose contrast
/// follows saturation and whose scale follows value, on a positive floor.
/// No pixel maps to a zero signature.
SpectralCube lift(const RgbImage& rgb, int bands, std::uint64_t seed);

/// Draws ceil(fraction * W * H) distinct pixels with a seeded generator and
/// pairs each cube signature with the co-located color of `rgb`.
ControlPointSet sampleAligned(const SpectralCube& cube, const RgbImage& rgb,
                              double fraction, std::uint64_t seed);

}  // namespace spectra::synthetic
