// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/homography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "spectra/error.hpp"
#include "spectra/random.hpp"

namespace spectra {

Homography::Homography(const Eigen::Matrix3d& matrix) {
  if (!matrix.allFinite()) fail(ErrorCode::kEstimation, "homography has non-finite entries");
  const double scale = matrix.cwiseAbs().maxCoeff();
  if (scale == 0.0 || std::fabs(matrix(2, 2)) <= 1e-12 * scale) {
    fail(ErrorCode::kEstimation, "homography cannot be normalized (H[2][2] = 0)");
  }
  matrix_ = matrix / matrix(2, 2);
  const double det = matrix_.determinant();
  const double norm = matrix_.cwiseAbs().maxCoeff();
  if (!(std::fabs(det) > 1e-12 * norm * norm * norm)) {
    fail(ErrorCode::kEstimation, "homography is singular");
  }
}

Eigen::Vector2d Homography::apply(const Eigen::Vector2d& point) const {
  const Eigen::Vector3d h = matrix_ * point.homogeneous();
  return h.hnormalized();
}

Homography Homography::inverse() const { return Homography(matrix_.inverse()); }

namespace {

/// Similarity taking the points' centroid to the origin and their mean
/// distance from it to sqrt(2).
Eigen::Matrix3d normalizingTransform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double meanDist = 0;
  for (const auto& p : pts) meanDist += (p - centroid).norm();
  meanDist /= static_cast<double>(pts.size());
  const double s = meanDist > 0 ? std::numbers::sqrt2 / meanDist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(),
       0, s, -s * centroid.y(),
       0, 0, 1;
  return t;
}

std::vector<double> transferErrors(const Homography& h, std::span<const Correspondence> pairs) {
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector2d p = h.apply(pairs[i].from);
    const double e = (p - pairs[i].to).norm();
    out[i] = std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  }
  return out;
}

struct Scored {
  std::vector<std::size_t> inliers;
  double meanError = std::numeric_limits<double>::infinity();
};

Scored score(const Homography& h, std::span<const Correspondence> pairs, double tolerance) {
  Scored s;
  double total = 0;
  const auto errors = transferErrors(h, pairs);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i] < tolerance) {
      s.inliers.push_back(i);
      total += errors[i];
    }
  }
  if (!s.inliers.empty()) s.meanError = total / static_cast<double>(s.inliers.size());
  return s;
}

bool better(const Scored& a, const Scored& b) {
  if (a.inliers.size() != b.inliers.size()) return a.inliers.size() > b.inliers.size();
  return a.meanError < b.meanError;
}

}  // namespace

bool hasCollinearTriple(std::span<const Eigen::Vector2d> points) {
  double extent = 0;
  for (const auto& a : points)
    for (const auto& b : points) extent = std::max(extent, (a - b).norm());
  if (extent == 0) return true;
  const double tolerance = 1e-9 * extent * extent;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      for (std::size_t k = j + 1; k < points.size(); ++k) {
        const Eigen::Vector2d u = points[j] - points[i], v = points[k] - points[i];
        if (std::fabs(u.x() * v.y() - u.y() * v.x()) <= tolerance) return true;
      }
  return false;
}

Homography fitHomographyDlt(std::span<const Correspondence> pairs) {
  if (pairs.size() < 4) {
    fail(ErrorCode::kInvalid, "homography needs at least 4 correspondences, got " +
                                  std::to_string(pairs.size()));
  }
  std::vector<Eigen::Vector2d> from, to;
  for (const auto& c : pairs) {
    from.push_back(c.from);
    to.push_back(c.to);
  }
  const Eigen::Matrix3d tFrom = normalizingTransform(from);
  const Eigen::Matrix3d tTo = normalizingTransform(to);

  Eigen::MatrixXd a(2 * pairs.size(), 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector2d p = (tFrom * from[i].homogeneous()).hnormalized();
    const Eigen::Vector2d q = (tTo * to[i].homogeneous()).hnormalized();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -p.x(), -p.y(), -1, 0, 0, 0, q.x() * p.x(), q.x() * p.y(), q.x();
    a.row(r + 1) << 0, 0, 0, -p.x(), -p.y(), -1, q.y() * p.x(), q.y() * p.y(), q.y();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d normalized;
  normalized << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  return Homography(tTo.inverse() * normalized * tFrom);
}

HomographyEstimate estimateHomography(std::span<const Correspondence> pairs,
                                      const RansacSettings& settings) {
  if (pairs.size() < 4) {
    fail(ErrorCode::kInvalid, "homography needs at least 4 correspondences, got " +
                                  std::to_string(pairs.size()));
  }
  if (settings.iterations < 1 || !(settings.inlierTolerance > 0)) {
    fail(ErrorCode::kInvalid, "ransac settings out of range");
  }
  Rng rng(settings.seed);
  std::optional<Homography> best;
  Scored bestScore;

  for (int it = 0; it < settings.iterations; ++it) {
    std::array<std::size_t, 4> idx{};
    for (std::size_t k = 0; k < 4; ++k) {
      bool fresh = false;
      while (!fresh) {
        idx[k] = static_cast<std::size_t>(rng.below(pairs.size()));
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      }
    }
    std::array<Correspondence, 4> sample;
    std::array<Eigen::Vector2d, 4> from, to;
    for (std::size_t k = 0; k < 4; ++k) {
      sample[k] = pairs[idx[k]];
      from[k] = sample[k].from;
      to[k] = sample[k].to;
    }
    if (hasCollinearTriple(from) || hasCollinearTriple(to)) continue;
    try {
      const Homography h = fitHomographyDlt(sample);
      const Scored s = score(h, pairs, settings.inlierTolerance);
      if (s.inliers.size() >= 4 && (!best || better(s, bestScore))) {
        best = h;
        bestScore = s;
      }
    } catch (const Error&) {
      // degenerate minimal sample
    }
    if (pairs.size() == 4 && best) break;
  }
  if (!best) {
    fail(ErrorCode::kEstimation, "homography estimation failed: no non-degenerate model among " +
                                     std::to_string(pairs.size()) + " correspondences");
  }

  for (int round = 0; round < 10; ++round) {
    std::vector<Correspondence> inlierPairs;
    for (std::size_t i : bestScore.inliers) inlierPairs.push_back(pairs[i]);
    try {
      const Homography refit = fitHomographyDlt(inlierPairs);
      const Scored s = score(refit, pairs, settings.inlierTolerance);
      if (s.inliers.size() < bestScore.inliers.size()) break;
      const bool unchanged = s.inliers == bestScore.inliers;
      best = refit;
      bestScore = s;
      if (unchanged) break;
    } catch (const Error&) {
      break;
    }
  }
  return {*best, bestScore.inliers, bestScore.meanError};
}

}  // namespace spectra
