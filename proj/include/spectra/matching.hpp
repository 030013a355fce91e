// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spectra/control_points.hpp"
#include "spectra/homography.hpp"
#include "spectra/raster.hpp"
#include "spectra/sift.hpp"

namespace spectra {

struct MatchConfig {
  int windowRadius = 4;          // refinement window is (2r+1)^2
  double sampleFraction = 0.01;  // share of cube pixels drawn as control candidates
  double ratioThreshold = 0.8;
  int ransacIterations = 2000;
  double ransacInlierTol = 3.0;
  std::uint64_t rngSeed = 0x5eed5eedULL;

  /// Throws Error(kInvalid) naming the first field out of range.
  void validate() const;
};

struct DescriptorMatch {
  std::size_t a = 0;
  std::size_t b = 0;
  float distance = 0;  // nearest L2 distance
  float ratio = 0;     // nearest / second nearest
};

/// Nearest-neighbour matching of `a` against `b` with the ratio test:
/// accepted iff nearest / second-nearest < ratioThreshold (a lone candidate
/// has ratio 0, exact ties have ratio 1). Sorted by ascending distance,
/// then by index into `a`.
std::vector<DescriptorMatch> matchDescriptors(std::span<const Keypoint> a,
                                              std::span<const Keypoint> b,
                                              const MatchConfig& cfg);

/// Window search for the final match of cube pixels in the reference image.
/// Precomputes fixed-scale descriptor fields on both grayscale proxies
/// (band mean for the cube, luminance for the image).
class MatchRefiner {
 public:
  MatchRefiner(const SpectralCube& cube, const RgbImage& rgb);

  /// Position in the window around round(H * pixel), clipped to the image,
  /// whose descriptor is closest to the cube descriptor at `pixel`. Ties go
  /// to the position nearest H * pixel, then to row-major order. Throws
  /// Error(kOutOfBounds) when the clipped window is empty.
  PixelCoord refine(const Homography& h, PixelCoord pixel, int windowRadius) const;

 private:
  DescriptorField cube_;
  DescriptorField rgb_;
};

PixelCoord refineMatch(const SpectralCube& cube, const RgbImage& rgb, const Homography& h,
                       PixelCoord pixel, const MatchConfig& cfg);

struct MatchReport {
  Homography homography = Homography::identity();
  std::size_t cubeKeypoints = 0;
  std::size_t rgbKeypoints = 0;
  std::size_t correspondences = 0;  // pooled, deduplicated matches fed to RANSAC
  std::size_t inliers = 0;
  double meanInlierError = 0.0;
  std::size_t sampled = 0;
  std::size_t skippedZero = 0;
  std::size_t skippedOutOfBounds = 0;
};

struct MatchResult {
  ControlPointSet points;
  MatchReport report;
};

/// Keypoint correspondences between every cube band (plus the band-mean
/// proxy) and the reference luminance, pooled by ratio score and
/// deduplicated within 1 px at both ends.
std::vector<Correspondence> pooledCorrespondences(const SpectralCube& cube, const RgbImage& rgb,
                                                  const MatchConfig& cfg, int threads,
                                                  MatchReport* report = nullptr);

/// Coarse registration, seeded sampling and window refinement, emitting
/// (cube signature, reference color) pairs with provenance. Deterministic
/// for fixed inputs and config, independent of `threads`.
MatchResult buildControlPoints(const SpectralCube& cube, const RgbImage& rgb,
                               const MatchConfig& cfg, const std::string& sensorTag = {},
                               int threads = 0);

}  // namespace spectra
