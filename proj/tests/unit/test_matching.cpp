// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "spectra/error.hpp"
#include "spectra/homography.hpp"
#include "spectra/matching.hpp"
#include "spectra/sift.hpp"
#include "spectra/synthetic.hpp"

using namespace spectra;

namespace {

GrayImage rotated90(const GrayImage& g) {
  GrayImage out(g.height, g.width);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = g.at(y, g.height - 1 - x);
  return out;
}

GrayImage shifted(const GrayImage& g, int dx, int dy) {
  GrayImage out(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const int sx = std::clamp(x - dx, 0, g.width - 1);
      const int sy = std::clamp(y - dy, 0, g.height - 1);
      out.at(x, y) = g.at(sx, sy);
    }
  return out;
}

Keypoint withDescriptor(double x, double y, const Descriptor& d) {
  Keypoint k;
  k.x = x;
  k.y = y;
  k.descriptor = d;
  return k;
}

Descriptor randomDescriptor(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Descriptor d{};
  float norm = 0;
  for (auto& v : d) {
    v = dist(rng);
    norm += v * v;
  }
  for (auto& v : d) v /= std::sqrt(norm);
  return d;
}

Eigen::Matrix3d randomHomography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> small(-0.1, 0.1);
  std::uniform_real_distribution<double> shift(-20, 20);
  std::uniform_real_distribution<double> persp(-1e-4, 1e-4);
  Eigen::Matrix3d h;
  h << 1 + small(rng), small(rng), shift(rng), small(rng), 1 + small(rng), shift(rng),
      persp(rng), persp(rng), 1;
  return h;
}

std::vector<Correspondence> exactPairs(const Homography& h, std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> coord(0, 200);
  std::vector<Correspondence> pairs;
  for (int i = 0; i < count; ++i) {
    const Eigen::Vector2d p(coord(rng), coord(rng));
    pairs.push_back({p, h.apply(p)});
  }
  return pairs;
}

/// Gray RGB image and 3-band cube sharing one texture: the cube's band mean
/// equals the image luminance exactly.
std::pair<SpectralCube, RgbImage> sharedTexture(const RgbImage& source) {
  const GrayImage gray = rgbProxy(source);
  RgbImage rgb = toDisplay(gray);
  std::vector<double> values;
  for (double g : gray.values) values.insert(values.end(), {g, g, g});
  return {SpectralCube(gray.width, gray.height, 3, std::move(values)), rgb};
}

RgbImage translatedRgb(const RgbImage& in, int dx, int dy) {
  RgbImage out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, in.width() - 1);
      const int sy = std::clamp(y - dy, 0, in.height() - 1);
      out.setPixel(x, y, in.pixel(sx, sy));
    }
  return out;
}

}  // namespace

TEST_CASE("keypoints: constant image has none, tiny image is rejected") {
  CHECK(detectKeypoints(GrayImage(64, 48, 0.5f)).empty());
  CHECK_THROWS_AS(detectKeypoints(GrayImage(15, 40, 0.0f)), Error);
}

TEST_CASE("keypoints: descriptors are unit length and detection is deterministic") {
  const GrayImage g = rgbProxy(synthetic::texture(96, 80, 3));
  const auto a = detectKeypoints(g);
  const auto b = detectKeypoints(g);
  REQUIRE(a.size() > 20);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].descriptor == b[i].descriptor);
    float norm = 0;
    for (float v : a[i].descriptor) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("keypoints: 90 degree rotation keeps the count within 10%") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const GrayImage g = rgbProxy(synthetic::texture(129, 97, seed));
    const double n = static_cast<double>(detectKeypoints(g).size());
    const double r = static_cast<double>(detectKeypoints(rotated90(g)).size());
    REQUIRE(n > 0);
    CHECK(std::abs(r - n) <= 0.1 * n);
  }
}

TEST_CASE("keypoints: integer shift moves at least half of them by exactly the shift") {
  const int dx = 5, dy = 3;
  const GrayImage g = rgbProxy(synthetic::texture(128, 96, 7));
  const auto base = detectKeypoints(g);
  const auto moved = detectKeypoints(shifted(g, dx, dy));
  REQUIRE(!base.empty());
  std::size_t hits = 0;
  for (const auto& k : base) {
    for (const auto& m : moved) {
      if (std::hypot(m.x - k.x - dx, m.y - k.y - dy) <= 1.0) {
        ++hits;
        break;
      }
    }
  }
  CHECK(hits * 2 >= base.size());
}

TEST_CASE("matchDescriptors: identical lists pair by identity with ratio 0") {
  std::mt19937_64 rng(11);
  std::vector<Keypoint> a;
  for (int i = 0; i < 30; ++i) a.push_back(withDescriptor(i, i, randomDescriptor(rng)));
  const auto matches = matchDescriptors(a, a, MatchConfig{});
  REQUIRE(matches.size() == a.size());
  for (const auto& m : matches) {
    CHECK(m.a == m.b);
    CHECK(m.ratio == doctest::Approx(0.0));
  }
}

TEST_CASE("matchDescriptors: equidistant candidates are rejected") {
  Descriptor left{}, right{}, query{};
  left[0] = 1;
  right[1] = 1;
  query[0] = query[1] = std::sqrt(0.5f);
  const std::vector<Keypoint> a{withDescriptor(0, 0, query)};
  const std::vector<Keypoint> b{withDescriptor(0, 0, left), withDescriptor(1, 1, right)};
  CHECK(matchDescriptors(a, b, MatchConfig{}).empty());
}

TEST_CASE("matchDescriptors: unrelated random descriptors are mostly rejected") {
  std::mt19937_64 rng(5);
  std::vector<Keypoint> a, b;
  for (int i = 0; i < 200; ++i) a.push_back(withDescriptor(0, 0, randomDescriptor(rng)));
  for (int i = 0; i < 200; ++i) b.push_back(withDescriptor(0, 0, randomDescriptor(rng)));
  const auto matches = matchDescriptors(a, b, MatchConfig{});
  CHECK(matches.size() <= 10);
  for (std::size_t i = 1; i < matches.size(); ++i)
    CHECK(matches[i - 1].distance <= matches[i].distance);
}

TEST_CASE("homography: identity, translation and exact fits") {
  const std::vector<Correspondence> self{{{0, 0}, {0, 0}},
                                         {{10, 0}, {10, 0}},
                                         {{0, 10}, {0, 10}},
                                         {{10, 12}, {10, 12}}};
  const auto id = estimateHomography(self, RansacSettings{});
  CHECK((id.homography.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);

  std::vector<Correspondence> moved;
  for (const auto& c : self) moved.push_back({c.from, c.from + Eigen::Vector2d(7.5, -3.25)});
  const auto t = estimateHomography(moved, RansacSettings{});
  for (const auto& c : moved) CHECK((t.homography.apply(c.from) - c.to).norm() < 1e-6);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Homography truth(randomHomography(rng));
    const auto pairs = exactPairs(truth, rng, 4 + trial);
    const auto est = estimateHomography(pairs, RansacSettings{});
    CHECK(est.inliers.size() == pairs.size());
    for (const auto& c : pairs) CHECK((est.homography.apply(c.from) - c.to).norm() < 1e-6);
  }
}

TEST_CASE("homography: normalized and invertible") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3d m = randomHomography(rng) * 3.7;
    const Homography h(m);
    CHECK(h.matrix()(2, 2) == 1.0);
    const Homography inv = h.inverse();
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector2d p(i * 17.0, 200.0 - i * 9.0);
      CHECK((inv.apply(h.apply(p)) - p).norm() < 1e-9);
    }
  }
  CHECK_THROWS_AS(Homography(Eigen::Matrix3d::Zero()), Error);
}

TEST_CASE("homography: 20% gross outliers are rejected") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> coord(0, 200);
  for (int trial = 0; trial < 10; ++trial) {
    const Homography truth(randomHomography(rng));
    auto pairs = exactPairs(truth, rng, 40);
    for (int i = 0; i < 10; ++i) pairs.push_back({{coord(rng), coord(rng)}, {coord(rng), coord(rng)}});
    RansacSettings settings;
    settings.seed = static_cast<std::uint64_t>(trial);
    const auto est = estimateHomography(pairs, settings);
    double worst = 0;
    for (std::size_t i = 0; i < 40; ++i)
      worst = std::max(worst, (est.homography.apply(pairs[i].from) - pairs[i].to).norm());
    CHECK(worst < 0.5);
  }
}

TEST_CASE("homography: too few pairs") {
  const std::vector<Correspondence> three{{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  try {
    estimateHomography(three, RansacSettings{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalid);
  }
}

TEST_CASE("refineMatch: self-match under an exact integer warp") {
  const auto [cube, base] = sharedTexture(synthetic::texture(96, 80, 4));
  const RgbImage rgb = translatedRgb(base, 4, -3);
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = 4;
  m(1, 2) = -3;
  const Homography h(m);
  const MatchRefiner refiner(cube, rgb);
  int checked = 0;
  for (int y = 12; y < 68; y += 5) {
    for (int x = 12; x < 84; x += 5) {
      const PixelCoord got = refiner.refine(h, {x, y}, 4);
      CHECK(got.x == x + 4);
      CHECK(got.y == y - 3);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("refineMatch: degenerate window, clipping and out-of-bounds") {
  const RgbImage rgb = synthetic::texture(64, 48, 2);
  const SpectralCube cube = synthetic::lift(rgb, 6, 1);
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = 0.6;
  m(1, 2) = -0.3;
  const Homography h(m);
  MatchConfig cfg;
  cfg.windowRadius = 0;
  for (int y = 0; y < 48; y += 7)
    for (int x = 0; x < 63; x += 7) {
      const PixelCoord got = refineMatch(cube, rgb, h, {x, y}, cfg);
      CHECK(got.x == x + 1);
      CHECK(got.y == y);
    }

  const MatchRefiner refiner(cube, rgb);
  for (int y = 0; y < 48; y += 3)
    for (int x = 0; x < 64; x += 3) {
      const PixelCoord got = refiner.refine(h, {x, y}, 3);
      const Eigen::Vector2d c = h.apply({x, y});
      CHECK(std::abs(got.x - std::lround(c.x())) <= 3);
      CHECK(std::abs(got.y - std::lround(c.y())) <= 3);
      CHECK(rgb.contains(got.x, got.y));
    }

  m(0, 2) = 200;
  try {
    refiner.refine(Homography(m), {10, 10}, 4);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfBounds);
  }
}

TEST_CASE("buildControlPoints: aligned proxy pair") {
  const SpectralCube cube = synthetic::lift(synthetic::texture(96, 80, 5), 12, 9);
  const RgbImage rgb = toDisplay(cubeProxy(cube));
  const auto result = buildControlPoints(cube, rgb, MatchConfig{}, "syn", 1);
  const Eigen::Matrix3d& h = result.report.homography.matrix();
  for (const Eigen::Vector2d corner : {Eigen::Vector2d(0, 0), Eigen::Vector2d(95, 0),
                                       Eigen::Vector2d(0, 79), Eigen::Vector2d(95, 79)})
    CHECK((result.report.homography.apply(corner) - corner).norm() < 2.0);
  CHECK(h(2, 2) == 1.0);
  CHECK(result.report.sampled == 77);
  CHECK(result.points.size() + result.report.skippedZero + result.report.skippedOutOfBounds ==
        77);
  CHECK(result.points.sensorTag() == "syn");
  for (const auto& pair : result.points.pairs()) {
    REQUIRE(pair.hsi.has_value());
    REQUIRE(pair.rgb.has_value());
    const auto sig = cube.signature(pair.hsi->x, pair.hsi->y);
    REQUIRE(pair.u.size() == sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) CHECK(pair.u[i] == sig[i]);
    CHECK(pair.v == rgb.pixel(pair.rgb->x, pair.rgb->y));
    CHECK(pair.rgb->x == pair.hsi->x);
    CHECK(pair.rgb->y == pair.hsi->y);
  }
}

TEST_CASE("buildControlPoints: tiny fraction yields one pair") {
  const RgbImage rgb = synthetic::texture(96, 80, 6);
  const SpectralCube cube = synthetic::lift(rgb, 8, 2);
  MatchConfig cfg;
  cfg.sampleFraction = 1e-6;
  const auto result = buildControlPoints(cube, rgb, cfg, {}, 1);
  CHECK(result.report.sampled == 1);
  CHECK(result.points.size() == 1);
}

TEST_CASE("buildControlPoints: deterministic across runs and thread counts") {
  const RgbImage rgb = synthetic::texture(96, 80, 8);
  const SpectralCube cube = synthetic::lift(rgb, 10, 3);
  const auto first = buildControlPoints(cube, rgb, MatchConfig{}, {}, 1);
  for (int threads : {1, 2, 5}) {
    const auto again = buildControlPoints(cube, rgb, MatchConfig{}, {}, threads);
    CHECK(again.report.homography.matrix() == first.report.homography.matrix());
    REQUIRE(again.points.size() == first.points.size());
    for (std::size_t i = 0; i < first.points.size(); ++i) {
      CHECK(again.points[i].u == first.points[i].u);
      CHECK(again.points[i].v == first.points[i].v);
      CHECK(again.points[i].hsi->x == first.points[i].hsi->x);
      CHECK(again.points[i].rgb->y == first.points[i].rgb->y);
    }
  }
  MatchConfig other;
  other.rngSeed = 99;
  const auto reseeded = buildControlPoints(cube, rgb, other, {}, 1);
  bool differs = reseeded.points.size() != first.points.size();
  for (std::size_t i = 0; !differs && i < first.points.size(); ++i)
    differs = reseeded.points[i].hsi->x != first.points[i].hsi->x ||
              reseeded.points[i].hsi->y != first.points[i].hsi->y;
  CHECK(differs);
}

TEST_CASE("match config validation") {
  MatchConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sampleFraction = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.windowRadius = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.ratioThreshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
