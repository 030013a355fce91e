// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/sift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "spectra/error.hpp"

namespace spectra {

namespace {

constexpr int kOrientationBins = 36;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationRadiusFactor = 3.0 * kOrientationSigmaFactor;
constexpr double kOrientationPeakRatio = 0.8;
constexpr int kDescriptorWidth = 4;
constexpr int kDescriptorBins = 8;
constexpr double kDescriptorScaleFactor = 3.0;
constexpr float kDescriptorMagnitudeCap = 0.2f;
constexpr int kMaxInterpolationSteps = 5;
constexpr int kImageBorder = 5;
constexpr double kAssumedInputBlur = 0.5;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
  return i;
}

GrayImage halve(const GrayImage& image) {
  GrayImage out((image.width + 1) / 2, (image.height + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = image.at(2 * x, 2 * y);
  return out;
}

/// Bilinear 2x upsampling; output pixel (2x, 2y) coincides with input (x, y).
GrayImage doubled(const GrayImage& image) {
  GrayImage out(2 * image.width - 1, 2 * image.height - 1);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int x0 = x / 2, y0 = y / 2;
      const int x1 = std::min(x0 + (x & 1), image.width - 1), y1 = std::min(y0 + (y & 1), image.height - 1);
      out.at(x, y) = 0.25f * (image.at(x0, y0) + image.at(x1, y0) + image.at(x0, y1) + image.at(x1, y1));
    }
  }
  return out;
}

GrayImage normalized(const GrayImage& image) {
  GrayImage out = image;
  const auto [lo, hi] = std::minmax_element(image.values.begin(), image.values.end());
  const float range = *hi - *lo;
  for (float& v : out.values) v = range > 0 ? (v - *lo) / range : 0.0f;
  return out;
}

/// Gradient at (x, y) with the y axis pointing up, as atan2 expects.
inline void gradient(const GrayImage& img, int x, int y, float& dx, float& dy) {
  dx = img.at(x + 1, y) - img.at(x - 1, y);
  dy = img.at(x, y - 1) - img.at(x, y + 1);
}

/// 4x4x8 histogram of gradient orientations around (px, py) on `img`,
/// rotated by `orientation`, with spatial bins `kDescriptorScaleFactor *
/// scale` pixels wide.
Descriptor computeDescriptor(const GrayImage& img, int px, int py, double orientation, double scale) {
  constexpr int d = kDescriptorWidth, n = kDescriptorBins;
  const double binsPerRadian = n / kTwoPi;
  const double expScale = -1.0 / (d * d * 0.5);
  const double histWidth = kDescriptorScaleFactor * scale;
  int radius = static_cast<int>(std::lround(histWidth * std::numbers::sqrt2 * (d + 1) * 0.5));
  radius = std::min(radius, static_cast<int>(std::hypot(img.width, img.height)));
  const double cosT = std::cos(orientation) / histWidth;
  const double sinT = std::sin(orientation) / histWidth;

  std::array<float, (d + 2) * (d + 2) * (n + 2)> hist{};
  auto cell = [&](int r, int c, int o) -> float& { return hist[((r * (d + 2)) + c) * (n + 2) + o]; };

  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) {
      const double cRot = j * cosT - i * sinT;
      const double rRot = j * sinT + i * cosT;
      const double rbin = rRot + d / 2.0 - 0.5;
      const double cbin = cRot + d / 2.0 - 0.5;
      const int r = py + i, c = px + j;
      if (!(rbin > -1 && rbin < d && cbin > -1 && cbin < d && r > 0 && r < img.height - 1 &&
            c > 0 && c < img.width - 1)) {
        continue;
      }
      float dx, dy;
      gradient(img, c, r, dx, dy);
      const double magnitude = std::hypot(dx, dy);
      if (magnitude == 0.0) continue;
      const double weight = std::exp((cRot * cRot + rRot * rRot) * expScale);
      double obin = (std::atan2(dy, dx) - orientation) * binsPerRadian;
      obin = std::fmod(obin, n);
      if (obin < 0) obin += n;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
      if (o0 >= n) o0 -= n;
      const double v = magnitude * weight;
      for (int dr = 0; dr < 2; ++dr) {
        const double vr = v * (dr ? fr : 1 - fr);
        for (int dc = 0; dc < 2; ++dc) {
          const double vc = vr * (dc ? fc : 1 - fc);
          for (int dob = 0; dob < 2; ++dob) {
            cell(r0 + 1 + dr, c0 + 1 + dc, o0 + dob) += static_cast<float>(vc * (dob ? fo : 1 - fo));
          }
        }
      }
    }
  }

  Descriptor out{};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      cell(r + 1, c + 1, 0) += cell(r + 1, c + 1, n);
      cell(r + 1, c + 1, 1) += cell(r + 1, c + 1, n + 1);
      for (int o = 0; o < n; ++o) out[(r * d + c) * n + o] = cell(r + 1, c + 1, o);
    }
  }
  double norm2 = 0;
  for (float v : out) norm2 += static_cast<double>(v) * v;
  if (norm2 == 0.0) return out;
  const float cap = kDescriptorMagnitudeCap * static_cast<float>(std::sqrt(norm2));
  norm2 = 0;
  for (float& v : out) {
    v = std::min(v, cap);
    norm2 += static_cast<double>(v) * v;
  }
  const auto inv = static_cast<float>(1.0 / std::sqrt(norm2));
  for (float& v : out) v *= inv;
  return out;
}

struct Octave {
  std::vector<GrayImage> gaussians;  // scalesPerOctave + 3
  std::vector<GrayImage> dogs;       // scalesPerOctave + 2
};

std::vector<double> orientationPeaks(const GrayImage& img, int px, int py, double scale) {
  const int radius = static_cast<int>(std::lround(kOrientationRadiusFactor * scale));
  const double sigma = kOrientationSigmaFactor * scale;
  const double expScale = -1.0 / (2.0 * sigma * sigma);
  std::array<double, kOrientationBins> raw{};
  for (int i = -radius; i <= radius; ++i) {
    const int y = py + i;
    if (y <= 0 || y >= img.height - 1) continue;
    for (int j = -radius; j <= radius; ++j) {
      const int x = px + j;
      if (x <= 0 || x >= img.width - 1) continue;
      float dx, dy;
      gradient(img, x, y, dx, dy);
      double angle = std::atan2(dy, dx);
      if (angle < 0) angle += kTwoPi;
      int bin = static_cast<int>(std::lround(angle * kOrientationBins / kTwoPi));
      if (bin >= kOrientationBins) bin -= kOrientationBins;
      raw[bin] += std::exp((i * i + j * j) * expScale) * std::hypot(dx, dy);
    }
  }
  std::array<double, kOrientationBins> hist{};
  for (int b = 0; b < kOrientationBins; ++b) {
    auto at = [&](int k) { return raw[(k + kOrientationBins) % kOrientationBins]; };
    hist[b] = (at(b - 2) + at(b + 2)) * (1.0 / 16) + (at(b - 1) + at(b + 1)) * (4.0 / 16) +
              at(b) * (6.0 / 16);
  }
  const double peak = *std::max_element(hist.begin(), hist.end());
  std::vector<double> out;
  if (peak <= 0) return out;
  for (int b = 0; b < kOrientationBins; ++b) {
    const double l = hist[(b + kOrientationBins - 1) % kOrientationBins];
    const double r = hist[(b + 1) % kOrientationBins];
    if (hist[b] > l && hist[b] > r && hist[b] >= kOrientationPeakRatio * peak) {
      double bin = b + 0.5 * (l - r) / (l - 2 * hist[b] + r);
      if (bin < 0) bin += kOrientationBins;
      if (bin >= kOrientationBins) bin -= kOrientationBins;
      out.push_back(bin * kTwoPi / kOrientationBins);
    }
  }
  return out;
}

}  // namespace

GrayImage gaussianBlur(const GrayImage& image, double sigma) {
  if (sigma <= 0) return image;
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = image.width, h = image.height;
  GrayImage tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * image.at(reflect(x + i, w), y);
      tmp.at(x, y) = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, reflect(y + i, h));
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

std::vector<Keypoint> detectKeypoints(const GrayImage& input, const SiftParams& params) {
  if (input.width < 16 || input.height < 16) {
    fail(ErrorCode::kInvalid, "keypoint detection needs at least 16x16 pixels, got " +
                                  std::to_string(input.width) + "x" + std::to_string(input.height));
  }
  const int s = params.scalesPerOctave;
  const double k = std::pow(2.0, 1.0 / s);
  const int octaves = std::max(
      params.minOctaves,
      static_cast<int>(std::floor(std::log2(std::min(input.width, input.height)))) - 2 +
          (params.upsample ? 1 : 0));

  std::vector<double> increments(s + 3);
  increments[0] = params.sigma;
  for (int i = 1; i < s + 3; ++i) {
    const double previous = params.sigma * std::pow(k, i - 1);
    const double total = previous * k;
    increments[i] = std::sqrt(total * total - previous * previous);
  }

  std::vector<Octave> pyramid(octaves);
  {
    const double inputBlur = params.upsample ? 2 * kAssumedInputBlur : kAssumedInputBlur;
    const double initial =
        std::sqrt(std::max(params.sigma * params.sigma - inputBlur * inputBlur, 0.01));
    GrayImage base = params.upsample ? gaussianBlur(doubled(normalized(input)), initial)
                                     : gaussianBlur(normalized(input), initial);
    for (int o = 0; o < octaves; ++o) {
      auto& oct = pyramid[o];
      oct.gaussians.push_back(o == 0 ? base : halve(pyramid[o - 1].gaussians[s]));
      for (int i = 1; i < s + 3; ++i) oct.gaussians.push_back(gaussianBlur(oct.gaussians.back(), increments[i]));
      for (int i = 0; i < s + 2; ++i) {
        GrayImage dog = oct.gaussians[i + 1];
        for (std::size_t p = 0; p < dog.values.size(); ++p) dog.values[p] -= oct.gaussians[i].values[p];
        oct.dogs.push_back(std::move(dog));
      }
    }
  }

  const double threshold = 0.5 * params.contrastThreshold / s;
  std::vector<Keypoint> keypoints;

  for (int o = 0; o < octaves; ++o) {
    const auto& dogs = pyramid[o].dogs;
    const int w = dogs[0].width, h = dogs[0].height;
    for (int layer = 1; layer <= s; ++layer) {
      const GrayImage& cur = dogs[layer];
      for (int r = kImageBorder; r < h - kImageBorder; ++r) {
        for (int c = kImageBorder; c < w - kImageBorder; ++c) {
          const float val = cur.at(c, r);
          if (!(std::fabs(val) > threshold)) continue;
          bool isMax = val > 0, isMin = val < 0;
          for (int dl = -1; dl <= 1 && (isMax || isMin); ++dl) {
            const GrayImage& g = dogs[layer + dl];
            for (int dy = -1; dy <= 1; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                const float nb = g.at(c + dx, r + dy);
                isMax = isMax && val >= nb;
                isMin = isMin && val <= nb;
              }
            }
          }
          if (!isMax && !isMin) continue;

          // Sub-pixel refinement by a quadratic fit in (x, y, scale).
          int lr = layer, rr = r, cc = c;
          Eigen::Vector3d offset = Eigen::Vector3d::Zero();
          Eigen::Vector3d dD;
          bool converged = false;
          for (int step = 0; step < kMaxInterpolationSteps; ++step) {
            const GrayImage& img = dogs[lr];
            const GrayImage& prev = dogs[lr - 1];
            const GrayImage& next = dogs[lr + 1];
            const double v2 = 2.0 * img.at(cc, rr);
            dD << (img.at(cc + 1, rr) - img.at(cc - 1, rr)) * 0.5,
                (img.at(cc, rr + 1) - img.at(cc, rr - 1)) * 0.5,
                (next.at(cc, rr) - prev.at(cc, rr)) * 0.5;
            const double dxx = img.at(cc + 1, rr) + img.at(cc - 1, rr) - v2;
            const double dyy = img.at(cc, rr + 1) + img.at(cc, rr - 1) - v2;
            const double dss = next.at(cc, rr) + prev.at(cc, rr) - v2;
            const double dxy = (img.at(cc + 1, rr + 1) - img.at(cc - 1, rr + 1) -
                                img.at(cc + 1, rr - 1) + img.at(cc - 1, rr - 1)) * 0.25;
            const double dxs = (next.at(cc + 1, rr) - next.at(cc - 1, rr) -
                                prev.at(cc + 1, rr) + prev.at(cc - 1, rr)) * 0.25;
            const double dys = (next.at(cc, rr + 1) - next.at(cc, rr - 1) -
                                prev.at(cc, rr + 1) + prev.at(cc, rr - 1)) * 0.25;
            Eigen::Matrix3d hess;
            hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
            const Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
            if (!lu.isInvertible()) break;
            offset = -lu.solve(dD);
            if (offset.cwiseAbs().maxCoeff() < 0.5) {
              converged = true;
              break;
            }
            if (offset.cwiseAbs().maxCoeff() > 1e6) break;
            cc += static_cast<int>(std::lround(offset[0]));
            rr += static_cast<int>(std::lround(offset[1]));
            lr += static_cast<int>(std::lround(offset[2]));
            if (lr < 1 || lr > s || cc < kImageBorder || cc >= w - kImageBorder ||
                rr < kImageBorder || rr >= h - kImageBorder) {
              break;
            }
          }
          if (!converged) continue;

          const GrayImage& img = dogs[lr];
          const double contrast = img.at(cc, rr) + 0.5 * dD.dot(offset);
          if (std::fabs(contrast) * s < params.contrastThreshold) continue;
          const double v2 = 2.0 * img.at(cc, rr);
          const double dxx = img.at(cc + 1, rr) + img.at(cc - 1, rr) - v2;
          const double dyy = img.at(cc, rr + 1) + img.at(cc, rr - 1) - v2;
          const double dxy = (img.at(cc + 1, rr + 1) - img.at(cc - 1, rr + 1) -
                              img.at(cc + 1, rr - 1) + img.at(cc - 1, rr - 1)) * 0.25;
          const double tr = dxx + dyy, det = dxx * dyy - dxy * dxy;
          const double edge = params.edgeThreshold;
          if (det <= 0 || tr * tr * edge >= (edge + 1) * (edge + 1) * det) continue;

          const double octaveScale = params.sigma * std::pow(2.0, (lr + offset[2]) / s);
          const double factor = std::ldexp(1.0, o) * (params.upsample ? 0.5 : 1.0);
          const GrayImage& gauss = pyramid[o].gaussians[lr];
          for (double angle : orientationPeaks(gauss, cc, rr, octaveScale)) {
            Keypoint kp;
            kp.x = (cc + offset[0]) * factor;
            kp.y = (rr + offset[1]) * factor;
            kp.scale = octaveScale * factor;
            kp.orientation = angle;
            kp.response = static_cast<float>(std::fabs(contrast));
            kp.descriptor = computeDescriptor(gauss, cc, rr, angle, octaveScale);
            float norm2 = 0;
            for (float v : kp.descriptor) norm2 += v * v;
            if (norm2 > 0) keypoints.push_back(kp);
          }
        }
      }
    }
  }
  return keypoints;
}

DescriptorField::DescriptorField(const GrayImage& image, double sigma)
    : blurred_(gaussianBlur(normalized(image), sigma)), sigma_(sigma) {}

Descriptor DescriptorField::describe(int x, int y) const {
  return computeDescriptor(blurred_, x, y, 0.0, sigma_);
}

float descriptorDistance2(const Descriptor& a, const Descriptor& b) {
  float sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const float d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace spectra
