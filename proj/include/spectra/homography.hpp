// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace spectra {

/// Projective map between image planes, scaled so that H(2,2) = 1.
class Homography {
 public:
  /// Throws Error(kEstimation) when the matrix is singular, non-finite or
  /// cannot be normalized.
  explicit Homography(const Eigen::Matrix3d& matrix);
  static Homography identity() { return Homography(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& matrix() const noexcept { return matrix_; }
  /// Maps a point; the result is non-finite for points on the line at
  /// infinity.
  Eigen::Vector2d apply(const Eigen::Vector2d& point) const;
  Homography inverse() const;

 private:
  Eigen::Matrix3d matrix_;
};

struct Correspondence {
  Eigen::Vector2d from;
  Eigen::Vector2d to;
};

struct RansacSettings {
  int iterations = 2000;
  double inlierTolerance = 3.0;  // forward transfer error, pixels
  std::uint64_t seed = 0;
};

struct HomographyEstimate {
  Homography homography = Homography::identity();
  std::vector<std::size_t> inliers;  // ascending indices into the input
  double meanInlierError = 0.0;
};

/// Least-squares DLT over all correspondences, with Hartley normalization
/// of both point sets. Needs at least four points.
Homography fitHomographyDlt(std::span<const Correspondence> pairs);

/// True when any three of the points are (nearly) collinear.
bool hasCollinearTriple(std::span<const Eigen::Vector2d> points);

/// RANSAC over minimal four-point DLT fits, followed by DLT re-fits on the
/// inlier set until it stops changing. Models are ranked by inlier count,
/// then by mean inlier error. Throws Error(kInvalid) for fewer than four
/// pairs and Error(kEstimation) when no non-degenerate model is found.
HomographyEstimate estimateHomography(std::span<const Correspondence> pairs,
                                      const RansacSettings& settings);

}  // namespace spectra
