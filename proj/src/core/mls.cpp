// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/mls.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Cholesky>

#include "spectra/error.hpp"
#include "spectra/parallel.hpp"

namespace spectra {

void MlsConfig::validate() const {
  if (!(sadEpsilon > 0.0) || !std::isfinite(sadEpsilon)) {
    fail(ErrorCode::kInvalid, "sad epsilon must be positive");
  }
  if (!(ridgeLambda >= 0.0) || !std::isfinite(ridgeLambda)) {
    fail(ErrorCode::kInvalid, "ridge lambda must be non-negative");
  }
  if (!(weightExponent > 0.0) || !std::isfinite(weightExponent)) {
    fail(ErrorCode::kInvalid, "weight exponent must be positive");
  }
}

ControlMatrices::ControlMatrices(Eigen::MatrixXd u, Eigen::Matrix3Xd v)
    : u_(std::move(u)), v_(std::move(v)) {
  if (u_.rows() < 1 || u_.cols() < 1) {
    fail(ErrorCode::kInvalid, "control matrices: need at least one band and one pair");
  }
  if (u_.cols() != v_.cols()) {
    fail(ErrorCode::kFormat, "control matrices: u and v column counts differ");
  }
  if (!u_.allFinite() || !v_.allFinite()) {
    fail(ErrorCode::kFormat, "control matrices: non-finite entry");
  }
  norms_ = u_.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < norms_.size(); ++k) {
    if (norms_[k] == 0.0) {
      fail(ErrorCode::kInvalid, "control matrices: zero signature in column " + std::to_string(k));
    }
  }
}

namespace {

Eigen::MatrixXd signaturesOf(const ControlPointSet& set) {
  Eigen::MatrixXd u(set.bands(), static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    for (int b = 0; b < set.bands(); ++b) u(b, static_cast<Eigen::Index>(k)) = set[k].u[b];
  }
  return u;
}

Eigen::Matrix3Xd colorsOf(const ControlPointSet& set) {
  Eigen::Matrix3Xd v(3, static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    for (int c = 0; c < 3; ++c) v(c, static_cast<Eigen::Index>(k)) = set[k].v[c];
  }
  return v;
}

double clampedAngle(double dot, double normProduct) {
  return std::acos(std::clamp(dot / normProduct, -1.0, 1.0));
}

}  // namespace

ControlMatrices::ControlMatrices(const ControlPointSet& set)
    : ControlMatrices(signaturesOf(set), colorsOf(set)) {}

double sad(std::span<const double> x, std::span<const double> u) {
  if (x.size() != u.size()) {
    fail(ErrorCode::kInvalid, "sad: length mismatch (" + std::to_string(x.size()) + " vs " +
                                  std::to_string(u.size()) + ")");
  }
  double dot = 0.0, xx = 0.0, uu = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * u[i];
    xx += x[i] * x[i];
    uu += u[i] * u[i];
  }
  if (xx == 0.0 || uu == 0.0) fail(ErrorCode::kInvalid, "sad: zero signature");
  return clampedAngle(dot, std::sqrt(xx) * std::sqrt(uu));
}

Eigen::VectorXd weights(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const ControlMatrices& ctrl, const MlsConfig& cfg) {
  if (x.size() != ctrl.bands()) {
    fail(ErrorCode::kInvalid, "weights: signature has " + std::to_string(x.size()) +
                                  " bands, control points have " + std::to_string(ctrl.bands()));
  }
  const double xNorm = x.norm();
  if (xNorm == 0.0) fail(ErrorCode::kInvalid, "weights: zero signature");

  const Eigen::VectorXd dots = ctrl.u().transpose() * x;
  Eigen::VectorXd w(ctrl.size());
  const bool unitExponent = cfg.weightExponent == 1.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double angle =
        std::max(clampedAngle(dots[k], xNorm * ctrl.norms()[k]), cfg.sadEpsilon);
    w[k] = unitExponent ? 1.0 / angle : std::pow(angle, -cfg.weightExponent);
  }
  if (!w.allFinite()) {
    fail(ErrorCode::kInvalid, "weights: non-finite weight (sad epsilon too small for exponent)");
  }
  return w;
}

Centroids weightedCentroids(const ControlMatrices& ctrl,
                            const Eigen::Ref<const Eigen::VectorXd>& w) {
  if (w.size() != ctrl.size()) fail(ErrorCode::kInvalid, "centroids: weight count mismatch");
  const double total = w.sum();
  return {ctrl.u() * w / total, ctrl.v() * w / total};
}

AffineColorMap solveWeighted(const ControlMatrices& ctrl,
                             const Eigen::Ref<const Eigen::VectorXd>& w,
                             const MlsConfig& cfg) {
  const Centroids c = weightedCentroids(ctrl, w);
  const Eigen::Index p = ctrl.bands();

  // Columns centered on the weighted centroids and scaled by sqrt(w_k), so
  // that U W U^T = S S^T and U W V^T = S (sqrt(W) V)^T.
  const Eigen::VectorXd root = w.cwiseSqrt();
  const Eigen::MatrixXd scaled = (ctrl.u().colwise() - c.u) * root.asDiagonal();
  const Eigen::Matrix3Xd scaledColors = (ctrl.v().colwise() - c.v) * root.asDiagonal();

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p, p);
  normal.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  const Eigen::MatrixX3d rhs = scaled * scaledColors.transpose();

  const double trace = normal.trace();
  double lambda = cfg.ridgeLambda;
  if (cfg.ridgeRelative && trace > 0.0) lambda *= trace / static_cast<double>(p);
  normal.diagonal().array() += lambda;

  const Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(normal);
  constexpr double kMinReciprocalCondition = 1e-13;
  if (llt.info() != Eigen::Success || !(llt.rcond() > kMinReciprocalCondition)) {
    fail(ErrorCode::kSingular,
         "singular normal matrix (n = " + std::to_string(ctrl.size()) + ", p = " +
             std::to_string(p) + "); use a positive ridge lambda");
  }
  AffineColorMap map;
  map.linear = llt.solve(rhs);
  map.offset = c.v - map.linear.transpose() * c.u;
  if (!map.linear.allFinite() || !map.offset.allFinite()) {
    fail(ErrorCode::kSingular, "solver produced non-finite coefficients; use a positive ridge lambda");
  }
  return map;
}

AffineColorMap solveAffine(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const ControlMatrices& ctrl, const MlsConfig& cfg) {
  return solveWeighted(ctrl, weights(x, ctrl, cfg), cfg);
}

Eigen::Vector3d applyMapUnclamped(const AffineColorMap& map,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != map.linear.rows()) {
    fail(ErrorCode::kInvalid, "applyMap: signature length " + std::to_string(x.size()) +
                                  " differs from map bands " + std::to_string(map.linear.rows()));
  }
  return map.linear.transpose() * x + map.offset;
}

Eigen::Vector3d applyMap(const AffineColorMap& map, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return applyMapUnclamped(map, x).cwiseMax(0.0).cwiseMin(255.0);
}

Rgb quantize(const Eigen::Vector3d& y) {
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double v = std::isfinite(y[c]) ? std::clamp(y[c], 0.0, 255.0) : 0.0;
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

double objective(const AffineColorMap& map, const Eigen::Ref<const Eigen::VectorXd>& x,
                 const ControlMatrices& ctrl, const MlsConfig& cfg) {
  const Eigen::VectorXd w = weights(x, ctrl, cfg);
  const Eigen::Matrix3Xd residual =
      (map.linear.transpose() * ctrl.u()).colwise() + map.offset - ctrl.v();
  return residual.colwise().squaredNorm().dot(w);
}

Rgb zeroSignatureColor(const ControlMatrices& ctrl) {
  return quantize(ctrl.v().rowwise().mean());
}

namespace {

/// Groups bitwise-equal signatures. `owner[i]` is the index of the first
/// pixel carrying pixel i's signature; `uniques` lists those first pixels in
/// scan order.
struct SignatureGroups {
  std::vector<std::uint32_t> uniques;
  std::vector<std::uint32_t> owner;
};

SignatureGroups groupSignatures(const SpectralCube& cube, bool dedup) {
  const std::size_t count = cube.pixelCount();
  const std::size_t bytes = static_cast<std::size_t>(cube.bands()) * sizeof(double);
  SignatureGroups groups;
  groups.owner.resize(count);
  if (!dedup) {
    groups.uniques.resize(count);
    for (std::size_t i = 0; i < count; ++i) groups.uniques[i] = groups.owner[i] = static_cast<std::uint32_t>(i);
    return groups;
  }
  std::unordered_map<std::size_t, std::vector<std::uint32_t>> buckets;
  buckets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto sig = cube.signature(i);
    const std::string_view key(reinterpret_cast<const char*>(sig.data()), bytes);
    auto& bucket = buckets[std::hash<std::string_view>{}(key)];
    std::uint32_t match = static_cast<std::uint32_t>(i);
    for (std::uint32_t candidate : bucket) {
      if (std::memcmp(cube.signature(candidate).data(), sig.data(), bytes) == 0) {
        match = candidate;
        break;
      }
    }
    if (match == i) {
      bucket.push_back(match);
      groups.uniques.push_back(match);
    }
    groups.owner[i] = match;
  }
  return groups;
}

}  // namespace

RgbImage render(const SpectralCube& fullCube, const ControlPointSet& set,
                const MlsConfig& cfg, const RenderOptions& options, RenderStats* stats) {
  cfg.validate();
  if (fullCube.bands() != set.bands()) {
    fail(ErrorCode::kFormat, "band mismatch: cube has " + std::to_string(fullCube.bands()) +
                                 " bands, control points have " + std::to_string(set.bands()));
  }
  const SpectralCube cube =
      options.previewStride > 1 ? downsample(fullCube, options.previewStride) : fullCube;
  const ControlMatrices ctrl(set);
  const Rgb zeroColor = zeroSignatureColor(ctrl);
  const SignatureGroups groups = groupSignatures(cube, cfg.dedupEnabled);

  std::vector<Rgb> colors(groups.uniques.size());
  std::vector<std::uint8_t> isZero(groups.uniques.size(), 0);
  constexpr std::size_t kChunk = 256;
  parallelFor(groups.uniques.size(), options.threads, kChunk,
              [&](std::size_t begin, std::size_t end) {
                for (std::size_t j = begin; j < end; ++j) {
                  const auto sig = cube.signature(groups.uniques[j]);
                  const Eigen::Map<const Eigen::VectorXd> x(sig.data(),
                                                            static_cast<Eigen::Index>(sig.size()));
                  if (x.squaredNorm() == 0.0) {
                    colors[j] = zeroColor;
                    isZero[j] = 1;
                    continue;
                  }
                  colors[j] = quantize(applyMap(solveAffine(x, ctrl, cfg), x));
                }
              });

  // Map first-pixel indices back to slots in `colors`.
  std::vector<std::uint32_t> slot(cube.pixelCount());
  for (std::size_t j = 0; j < groups.uniques.size(); ++j) slot[groups.uniques[j]] = static_cast<std::uint32_t>(j);

  RgbImage out(cube.width(), cube.height());
  auto dst = out.mutableValues();
  std::size_t zeroPixels = 0;
  for (std::size_t i = 0; i < cube.pixelCount(); ++i) {
    const std::uint32_t j = slot[groups.owner[i]];
    std::copy(colors[j].begin(), colors[j].end(), dst.begin() + 3 * i);
    zeroPixels += isZero[j];
  }
  if (stats != nullptr) {
    stats->solves = groups.uniques.size();
    stats->zeroPixels = zeroPixels;
  }
  return out;
}

}  // namespace spectra
