// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

#include "spectra/error.hpp"
#include "spectra/parallel.hpp"
#include "spectra/random.hpp"

namespace spectra {

void MatchConfig::validate() const {
  if (windowRadius < 0) fail(ErrorCode::kInvalid, "window radius must be >= 0");
  if (!(sampleFraction > 0.0 && sampleFraction <= 1.0)) {
    fail(ErrorCode::kInvalid, "sample fraction must be in (0, 1]");
  }
  if (!(ratioThreshold > 0.0 && ratioThreshold < 1.0)) {
    fail(ErrorCode::kInvalid, "ratio threshold must be in (0, 1)");
  }
  if (ransacIterations < 1) fail(ErrorCode::kInvalid, "ransac iterations must be >= 1");
  if (!(ransacInlierTol > 0.0)) fail(ErrorCode::kInvalid, "ransac inlier tolerance must be > 0");
}

std::vector<DescriptorMatch> matchDescriptors(std::span<const Keypoint> a,
                                              std::span<const Keypoint> b,
                                              const MatchConfig& cfg) {
  std::vector<DescriptorMatch> out;
  if (a.empty() || b.empty()) return out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    float best = std::numeric_limits<float>::infinity();
    float second = std::numeric_limits<float>::infinity();
    std::size_t bestIndex = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const float d = descriptorDistance2(a[i].descriptor, b[j].descriptor);
      if (d < best) {
        second = best;
        best = d;
        bestIndex = j;
      } else if (d < second) {
        second = d;
      }
    }
    const float nearest = std::sqrt(best), runnerUp = std::sqrt(second);
    float ratio = 0.0f;
    if (std::isinf(runnerUp)) ratio = 0.0f;
    else if (runnerUp == nearest) ratio = 1.0f;
    else ratio = nearest / runnerUp;
    if (ratio < cfg.ratioThreshold) out.push_back({i, bestIndex, nearest, ratio});
  }
  std::stable_sort(out.begin(), out.end(), [](const DescriptorMatch& l, const DescriptorMatch& r) {
    return l.distance < r.distance;
  });
  return out;
}

MatchRefiner::MatchRefiner(const SpectralCube& cube, const RgbImage& rgb)
    : cube_(cubeProxy(cube)), rgb_(rgbProxy(rgb)) {}

PixelCoord MatchRefiner::refine(const Homography& h, PixelCoord pixel, int windowRadius) const {
  if (windowRadius < 0) fail(ErrorCode::kInvalid, "window radius must be >= 0");
  const Eigen::Vector2d projected = h.apply(Eigen::Vector2d(pixel.x, pixel.y));
  const double limit = 1e9;
  if (!projected.allFinite() || std::fabs(projected.x()) > limit || std::fabs(projected.y()) > limit) {
    fail(ErrorCode::kOutOfBounds, "projected point is not finite");
  }
  const long cx = std::lround(projected.x()), cy = std::lround(projected.y());
  const long x0 = std::max(0L, cx - windowRadius), x1 = std::min<long>(rgb_.width() - 1, cx + windowRadius);
  const long y0 = std::max(0L, cy - windowRadius), y1 = std::min<long>(rgb_.height() - 1, cy + windowRadius);
  if (x0 > x1 || y0 > y1) {
    fail(ErrorCode::kOutOfBounds,
         "projected point (" + std::to_string(projected.x()) + ", " + std::to_string(projected.y()) +
             ") and its window lie outside the " + std::to_string(rgb_.width()) + "x" +
             std::to_string(rgb_.height()) + " reference image");
  }

  const Descriptor source = cube_.describe(pixel.x, pixel.y);
  PixelCoord best{static_cast<int>(x0), static_cast<int>(y0)};
  float bestDistance = std::numeric_limits<float>::infinity();
  double bestProximity = std::numeric_limits<double>::infinity();
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      const float d = descriptorDistance2(source, rgb_.describe(static_cast<int>(x), static_cast<int>(y)));
      const double proximity = (Eigen::Vector2d(x, y) - projected).squaredNorm();
      if (d < bestDistance || (d == bestDistance && proximity < bestProximity)) {
        best = {static_cast<int>(x), static_cast<int>(y)};
        bestDistance = d;
        bestProximity = proximity;
      }
    }
  }
  return best;
}

PixelCoord refineMatch(const SpectralCube& cube, const RgbImage& rgb, const Homography& h,
                       PixelCoord pixel, const MatchConfig& cfg) {
  if (!cube.contains(pixel.x, pixel.y)) fail(ErrorCode::kOutOfBounds, "pixel outside the cube");
  return MatchRefiner(cube, rgb).refine(h, pixel, cfg.windowRadius);
}

namespace {

struct PooledMatch {
  Correspondence pair;
  float ratio;
  float distance;
  int band;
  std::size_t index;
};

std::int64_t cellKey(long cx, long cy) { return (static_cast<std::int64_t>(cx) << 32) ^ (cy & 0xffffffff); }

}  // namespace

std::vector<Correspondence> pooledCorrespondences(const SpectralCube& cube, const RgbImage& rgb,
                                                  const MatchConfig& cfg, int threads,
                                                  MatchReport* report) {
  const std::vector<Keypoint> rgbKeys = detectKeypoints(rgbProxy(rgb));
  // One extra source after the bands: the band-mean proxy used for refinement.
  const std::size_t sources = static_cast<std::size_t>(cube.bands()) + 1;
  std::vector<std::vector<PooledMatch>> perBand(sources);
  std::vector<std::size_t> bandKeyCounts(sources);
  parallelFor(sources, threads, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::vector<Keypoint> keys =
          detectKeypoints(b + 1 == sources ? cubeProxy(cube) : bandImage(cube, static_cast<int>(b)));
      bandKeyCounts[b] = keys.size();
      for (const auto& m : matchDescriptors(keys, rgbKeys, cfg)) {
        perBand[b].push_back({{Eigen::Vector2d(keys[m.a].x, keys[m.a].y),
                               Eigen::Vector2d(rgbKeys[m.b].x, rgbKeys[m.b].y)},
                              m.ratio, m.distance, static_cast<int>(b), m.a});
      }
    }
  });

  std::vector<PooledMatch> pooled;
  for (auto& band : perBand) pooled.insert(pooled.end(), band.begin(), band.end());
  std::stable_sort(pooled.begin(), pooled.end(), [](const PooledMatch& l, const PooledMatch& r) {
    if (l.ratio != r.ratio) return l.ratio < r.ratio;
    return l.distance < r.distance;
  });

  // Drop matches within 1 px (at both ends) of a better-ranked one.
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  std::vector<Correspondence> kept;
  for (const auto& m : pooled) {
    const long cx = std::lround(std::floor(m.pair.from.x())), cy = std::lround(std::floor(m.pair.from.y()));
    bool duplicate = false;
    for (long dy = -1; dy <= 1 && !duplicate; ++dy) {
      for (long dx = -1; dx <= 1 && !duplicate; ++dx) {
        const auto it = grid.find(cellKey(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t k : it->second) {
          if ((kept[k].from - m.pair.from).norm() <= 1.0 && (kept[k].to - m.pair.to).norm() <= 1.0) {
            duplicate = true;
            break;
          }
        }
      }
    }
    if (duplicate) continue;
    grid[cellKey(cx, cy)].push_back(kept.size());
    kept.push_back(m.pair);
  }

  if (report != nullptr) {
    report->rgbKeypoints = rgbKeys.size();
    report->cubeKeypoints = 0;
    for (std::size_t c : bandKeyCounts) report->cubeKeypoints += c;
    report->correspondences = kept.size();
  }
  return kept;
}

MatchResult buildControlPoints(const SpectralCube& cube, const RgbImage& rgb, const MatchConfig& cfg,
                               const std::string& sensorTag, int threads) {
  cfg.validate();
  MatchReport report;
  const std::vector<Correspondence> pairs = pooledCorrespondences(cube, rgb, cfg, threads, &report);
  if (pairs.size() < 4) {
    fail(ErrorCode::kEstimation, "homography estimation failed: only " + std::to_string(pairs.size()) +
                                     " keypoint correspondences survived the ratio test");
  }
  const HomographyEstimate estimate =
      estimateHomography(pairs, {cfg.ransacIterations, cfg.ransacInlierTol, cfg.rngSeed});
  report.homography = estimate.homography;
  report.inliers = estimate.inliers.size();
  report.meanInlierError = estimate.meanInlierError;

  const auto total = static_cast<std::uint64_t>(cube.pixelCount());
  const auto wanted = static_cast<std::uint64_t>(
      std::ceil(cfg.sampleFraction * static_cast<double>(total) - 1e-9));
  Rng rng(cfg.rngSeed);
  const std::vector<std::uint64_t> sample =
      sampleWithoutReplacement(rng, total, std::clamp<std::uint64_t>(wanted, 1, total));
  report.sampled = sample.size();

  enum class Outcome : std::uint8_t { kKept, kZero, kOutOfBounds };
  std::vector<Outcome> outcome(sample.size(), Outcome::kKept);
  std::vector<PixelCoord> matched(sample.size());
  const MatchRefiner refiner(cube, rgb);
  parallelFor(sample.size(), threads, 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const PixelCoord p{static_cast<int>(sample[i] % cube.width()), static_cast<int>(sample[i] / cube.width())};
      const auto sig = cube.signature(p.x, p.y);
      if (std::all_of(sig.begin(), sig.end(), [](double v) { return v == 0.0; })) {
        outcome[i] = Outcome::kZero;
        continue;
      }
      try {
        matched[i] = refiner.refine(estimate.homography, p, cfg.windowRadius);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kOutOfBounds) throw;
        outcome[i] = Outcome::kOutOfBounds;
      }
    }
  });

  std::vector<ControlPair> controls;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (outcome[i] == Outcome::kZero) {
      ++report.skippedZero;
      continue;
    }
    if (outcome[i] == Outcome::kOutOfBounds) {
      ++report.skippedOutOfBounds;
      continue;
    }
    const PixelCoord p{static_cast<int>(sample[i] % cube.width()), static_cast<int>(sample[i] / cube.width())};
    const auto sig = cube.signature(p.x, p.y);
    controls.push_back({std::vector<double>(sig.begin(), sig.end()), rgb.pixel(matched[i].x, matched[i].y),
                        p, matched[i]});
  }
  if (controls.empty()) {
    fail(ErrorCode::kEstimation, "no control pairs survived (" + std::to_string(report.skippedZero) +
                                     " zero signatures, " + std::to_string(report.skippedOutOfBounds) +
                                     " outside the reference image)");
  }
  return {ControlPointSet(cube.bands(), std::move(controls), sensorTag), report};
}

}  // namespace spectra
