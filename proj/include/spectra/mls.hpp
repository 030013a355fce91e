// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "spectra/control_points.hpp"
#include "spectra/raster.hpp"

namespace spectra {

/// Solver settings for the per-signature weighted least squares.
struct MlsConfig {
  /// Floor applied to the spectral angle before inverting it, in radians.
  double sadEpsilon = 1e-8;
  /// Tikhonov weight added to the normal matrix. With `ridgeRelative` the
  /// applied value is ridgeLambda * tr(N) / p, N being the centered
  /// weighted scatter; when that trace is zero ridgeLambda is used as is.
  double ridgeLambda = 1e-6;
  bool ridgeRelative = true;
  /// w_k = 1 / max(angle, sadEpsilon)^weightExponent.
  double weightExponent = 1.0;
  /// Solve once per distinct (bitwise-equal) signature when rendering.
  bool dedupEnabled = true;

  /// Throws Error(kInvalid) when a field is out of range.
  void validate() const;
};

/// Control pairs as columns: u-side is p x n, v-side is 3 x n, both real.
/// Built once per render so per-pixel solves share column norms.
class ControlMatrices {
 public:
  ControlMatrices(Eigen::MatrixXd u, Eigen::Matrix3Xd v);
  explicit ControlMatrices(const ControlPointSet& set);

  int bands() const noexcept { return static_cast<int>(u_.rows()); }
  int size() const noexcept { return static_cast<int>(u_.cols()); }
  const Eigen::MatrixXd& u() const noexcept { return u_; }
  const Eigen::Matrix3Xd& v() const noexcept { return v_; }
  const Eigen::VectorXd& norms() const noexcept { return norms_; }

 private:
  Eigen::MatrixXd u_;
  Eigen::Matrix3Xd v_;
  Eigen::VectorXd norms_;
};

/// y = F^T x + b, F being p x 3.
struct AffineColorMap {
  Eigen::MatrixX3d linear;
  Eigen::Vector3d offset;
};

struct Centroids {
  Eigen::VectorXd u;
  Eigen::Vector3d v;
};

/// Spectral angle between two nonzero signatures, in [0, pi].
double sad(std::span<const double> x, std::span<const double> u);

Eigen::VectorXd weights(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const ControlMatrices& ctrl, const MlsConfig& cfg);

Centroids weightedCentroids(const ControlMatrices& ctrl,
                            const Eigen::Ref<const Eigen::VectorXd>& w);

/// Closed-form minimizer of the weighted objective for fixed weights.
/// Throws Error(kSingular) when the regularized normal matrix cannot be
/// factored.
AffineColorMap solveWeighted(const ControlMatrices& ctrl,
                             const Eigen::Ref<const Eigen::VectorXd>& w,
                             const MlsConfig& cfg);

/// The affine map for signature x: weights from x, then solveWeighted.
AffineColorMap solveAffine(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const ControlMatrices& ctrl, const MlsConfig& cfg);

Eigen::Vector3d applyMapUnclamped(const AffineColorMap& map,
                                  const Eigen::Ref<const Eigen::VectorXd>& x);
/// applyMapUnclamped clamped to [0, 255] per channel.
Eigen::Vector3d applyMap(const AffineColorMap& map,
                         const Eigen::Ref<const Eigen::VectorXd>& x);
/// Clamped value rounded to the nearest 8-bit level.
Rgb quantize(const Eigen::Vector3d& y);

/// Sum_k w_k |F^T U_k + b - V_k|^2 with weights taken at x. The ridge term
/// is not included.
double objective(const AffineColorMap& map,
                 const Eigen::Ref<const Eigen::VectorXd>& x,
                 const ControlMatrices& ctrl, const MlsConfig& cfg);

struct RenderOptions {
  int threads = 0;        // 0: all hardware threads
  int previewStride = 1;  // >1 renders a subsampled cube
};

struct RenderStats {
  std::size_t solves = 0;      // distinct signatures solved
  std::size_t zeroPixels = 0;  // pixels rendered with the fallback color
};

/// Color of an all-zero pixel: equal-weight centroid of the control colors.
Rgb zeroSignatureColor(const ControlMatrices& ctrl);

/// Maps every cube pixel through its own affine map. Output bytes depend
/// only on the inputs, never on the worker count.
RgbImage render(const SpectralCube& cube, const ControlPointSet& set,
                const MlsConfig& cfg, const RenderOptions& options = {},
                RenderStats* stats = nullptr);

}  // namespace spectra
