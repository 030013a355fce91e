// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "spectra/raster.hpp"

namespace spectra {

using Descriptor = std::array<float, 128>;

/// Scale-space keypoint with a 4x4x8 gradient-orientation descriptor.
struct Keypoint {
  double x = 0;  // input image coordinates, sub-pixel
  double y = 0;
  double scale = 0;        // Gaussian sigma in input pixels
  double orientation = 0;  // radians
  float response = 0;      // |DoG| at the refined extremum
  Descriptor descriptor{};
};

struct SiftParams {
  int scalesPerOctave = 3;
  double sigma = 1.6;
  double contrastThreshold = 0.04;
  double edgeThreshold = 10.0;
  int minOctaves = 3;
  /// Start the pyramid from a 2x bilinear upsampling of the input.
  bool upsample = true;
};

/// Separable Gaussian blur with mirrored borders.
GrayImage gaussianBlur(const GrayImage& image, double sigma);

/// Difference-of-Gaussians keypoints. The image is first rescaled to
/// [0, 1] by its own range, so constant images yield no keypoints.
/// Throws Error(kInvalid) for images smaller than 16x16.
std::vector<Keypoint> detectKeypoints(const GrayImage& image, const SiftParams& params = {});

/// Upright descriptors at a fixed scale, evaluated at arbitrary integer
/// positions of one image. Gradients are taken once from the image blurred
/// at `sigma`; samples falling outside the image contribute nothing.
class DescriptorField {
 public:
  explicit DescriptorField(const GrayImage& image, double sigma = 1.6);

  int width() const noexcept { return blurred_.width; }
  int height() const noexcept { return blurred_.height; }
  /// L2-normalized descriptor, or all zeros over a flat neighbourhood.
  Descriptor describe(int x, int y) const;

 private:
  GrayImage blurred_;
  double sigma_;
};

/// Squared L2 distance between descriptors.
float descriptorDistance2(const Descriptor& a, const Descriptor& b);

}  // namespace spectra
