// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/spectra.h"

#include <cstring>
#include <string>
#include <vector>

#include "spectra/error.hpp"
#include "spectra/io.hpp"
#include "spectra/matching.hpp"
#include "spectra/metrics.hpp"
#include "spectra/mls.hpp"
#include "spectra/preview/server.hpp"
#include "spectra/synthetic.hpp"

struct spectra_cube {
  spectra::SpectralCube value;
};

struct spectra_image {
  spectra::RgbImage value;
  std::vector<std::string> warnings;
};

struct spectra_points {
  spectra::ControlPointSet value;
};

namespace {

thread_local std::string lastError;

spectra_status record(spectra_status status, const char* message) {
  lastError = message;
  return status;
}

/// Runs `body`, mapping exceptions to status codes.
template <typename F>
spectra_status guarded(F&& body) noexcept {
  try {
    lastError.clear();
    body();
    return SPECTRA_OK;
  } catch (const spectra::Error& e) {
    return record(static_cast<spectra_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SPECTRA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(SPECTRA_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(SPECTRA_ERR_INTERNAL, "unknown error");
  }
}

void requireArg(const void* p, const char* name) {
  if (p == nullptr) spectra::fail(spectra::ErrorCode::kInvalid, std::string(name) + " is NULL");
}

spectra::MlsConfig toMls(const spectra_mls_config* c) {
  spectra::MlsConfig cfg;
  if (c != nullptr) {
    cfg.sadEpsilon = c->sad_epsilon;
    cfg.ridgeLambda = c->ridge_lambda;
    cfg.ridgeRelative = c->ridge_relative != 0;
    cfg.weightExponent = c->weight_exponent;
    cfg.dedupEnabled = c->dedup != 0;
  }
  return cfg;
}

spectra::MatchConfig toMatch(const spectra_match_config* c) {
  spectra::MatchConfig cfg;
  if (c != nullptr) {
    cfg.windowRadius = c->window_radius;
    cfg.sampleFraction = c->sample_fraction;
    cfg.ratioThreshold = c->ratio_threshold;
    cfg.ransacIterations = c->ransac_iterations;
    cfg.ransacInlierTol = c->ransac_inlier_tol;
    cfg.rngSeed = c->seed;
  }
  return cfg;
}

}  // namespace

extern "C" {

const char* spectra_version(void) { return SPECTRA_VERSION; }

const char* spectra_last_error(void) { return lastError.c_str(); }

const char* spectra_status_name(spectra_status status) {
  if (status == SPECTRA_OK) return "ok";
  return spectra::errorCodeName(static_cast<spectra::ErrorCode>(status));
}

spectra_status spectra_cube_read(const char* header_path, spectra_cube** out) {
  return guarded([&] {
    requireArg(header_path, "header_path");
    requireArg(out, "out");
    *out = new spectra_cube{spectra::readCube(header_path)};
  });
}

spectra_status spectra_cube_write(const spectra_cube* cube, const char* header_path) {
  return guarded([&] {
    requireArg(cube, "cube");
    requireArg(header_path, "header_path");
    spectra::writeCube(cube->value, header_path);
  });
}

void spectra_cube_dims(const spectra_cube* cube, int* width, int* height, int* bands) {
  if (width != nullptr) *width = cube->value.width();
  if (height != nullptr) *height = cube->value.height();
  if (bands != nullptr) *bands = cube->value.bands();
}

void spectra_cube_free(spectra_cube* cube) { delete cube; }

spectra_status spectra_image_read(const char* path, spectra_image** out) {
  return guarded([&] {
    requireArg(path, "path");
    requireArg(out, "out");
    spectra::RgbReadResult r = spectra::readRgb(path);
    *out = new spectra_image{std::move(r.image), std::move(r.warnings)};
  });
}

spectra_status spectra_image_write(const spectra_image* image, const char* path) {
  return guarded([&] {
    requireArg(image, "image");
    requireArg(path, "path");
    spectra::writeRgb(image->value, path);
  });
}

void spectra_image_dims(const spectra_image* image, int* width, int* height) {
  if (width != nullptr) *width = image->value.width();
  if (height != nullptr) *height = image->value.height();
}

const uint8_t* spectra_image_pixels(const spectra_image* image) {
  return image->value.values().data();
}

size_t spectra_image_warning_count(const spectra_image* image) { return image->warnings.size(); }

const char* spectra_image_warning(const spectra_image* image, size_t index) {
  return index < image->warnings.size() ? image->warnings[index].c_str() : nullptr;
}

void spectra_image_free(spectra_image* image) { delete image; }

spectra_status spectra_points_read(const char* path, spectra_points** out) {
  return guarded([&] {
    requireArg(path, "path");
    requireArg(out, "out");
    *out = new spectra_points{spectra::readControlPoints(path)};
  });
}

spectra_status spectra_points_write(const spectra_points* points, const char* path) {
  return guarded([&] {
    requireArg(points, "points");
    requireArg(path, "path");
    spectra::writeControlPoints(points->value, path);
  });
}

size_t spectra_points_size(const spectra_points* points) { return points->value.size(); }

int spectra_points_bands(const spectra_points* points) { return points->value.bands(); }

const char* spectra_points_sensor(const spectra_points* points) {
  return points->value.sensorTag().c_str();
}

void spectra_points_free(spectra_points* points) { delete points; }

void spectra_mls_config_default(spectra_mls_config* config) {
  const spectra::MlsConfig d;
  config->sad_epsilon = d.sadEpsilon;
  config->ridge_lambda = d.ridgeLambda;
  config->ridge_relative = d.ridgeRelative ? 1 : 0;
  config->weight_exponent = d.weightExponent;
  config->dedup = d.dedupEnabled ? 1 : 0;
}

spectra_status spectra_render(const spectra_cube* cube, const spectra_points* points,
                              const spectra_mls_config* config, int threads, int preview_stride,
                              spectra_image** out, spectra_render_stats* stats) {
  return guarded([&] {
    requireArg(cube, "cube");
    requireArg(points, "points");
    requireArg(out, "out");
    spectra::RenderStats s;
    spectra::RgbImage img = spectra::render(cube->value, points->value, toMls(config),
                                            {threads, preview_stride}, &s);
    *out = new spectra_image{std::move(img), {}};
    if (stats != nullptr) *stats = {s.solves, s.zeroPixels};
  });
}

void spectra_match_config_default(spectra_match_config* config) {
  const spectra::MatchConfig d;
  config->window_radius = d.windowRadius;
  config->sample_fraction = d.sampleFraction;
  config->ratio_threshold = d.ratioThreshold;
  config->ransac_iterations = d.ransacIterations;
  config->ransac_inlier_tol = d.ransacInlierTol;
  config->seed = d.rngSeed;
}

spectra_status spectra_match(const spectra_cube* cube, const spectra_image* image,
                             const spectra_match_config* config, const char* sensor, int threads,
                             spectra_points** out, spectra_match_report* report) {
  return guarded([&] {
    requireArg(cube, "cube");
    requireArg(image, "image");
    requireArg(out, "out");
    spectra::MatchResult r = spectra::buildControlPoints(
        cube->value, image->value, toMatch(config), sensor != nullptr ? sensor : "", threads);
    if (report != nullptr) {
      const auto& h = r.report.homography.matrix();
      for (int i = 0; i < 9; ++i) report->homography[i] = h(i / 3, i % 3);
      report->cube_keypoints = r.report.cubeKeypoints;
      report->image_keypoints = r.report.rgbKeypoints;
      report->correspondences = r.report.correspondences;
      report->inliers = r.report.inliers;
      report->mean_inlier_error = r.report.meanInlierError;
      report->sampled = r.report.sampled;
      report->skipped_zero = r.report.skippedZero;
      report->skipped_out_of_bounds = r.report.skippedOutOfBounds;
    }
    *out = new spectra_points{std::move(r.points)};
  });
}

spectra_status spectra_metrics(const spectra_image* image, const spectra_image* reference,
                               const double* homography, spectra_metric_report* report) {
  return guarded([&] {
    requireArg(image, "image");
    requireArg(report, "report");
    spectra::MetricReport m;
    if (reference == nullptr) {
      m = spectra::measure(image->value);
    } else if (homography == nullptr) {
      m = spectra::measure(image->value, reference->value);
    } else {
      Eigen::Matrix3d h;
      for (int i = 0; i < 9; ++i) h(i / 3, i % 3) = homography[i];
      m = spectra::measure(image->value, reference->value, spectra::Homography(h));
    }
    report->entropy_bits = m.entropyBits;
    report->has_rmse = m.rmse ? 1 : 0;
    report->rmse = m.rmse.value_or(0.0);
    report->pixel_count = m.pixelCount;
  });
}

spectra_status spectra_synthetic_scene(int width, int height, int bands, uint64_t seed,
                                       spectra_cube** cube, spectra_image** image) {
  return guarded([&] {
    requireArg(cube, "cube");
    requireArg(image, "image");
    if (width < 1 || height < 1 || bands < 1) {
      spectra::fail(spectra::ErrorCode::kInvalid, "scene dimensions must be >= 1");
    }
    spectra::RgbImage rgb = spectra::synthetic::texture(width, height, seed);
    auto* c = new spectra_cube{spectra::synthetic::lift(rgb, bands, seed + 1)};
    *image = new spectra_image{std::move(rgb), {}};
    *cube = c;
  });
}

void spectra_serve_options_default(spectra_serve_options* options) {
  const spectra::preview::ServerOptions d;
  options->host = nullptr;
  options->port = d.port;
  options->preview_stride = d.previewStride;
  options->idle_timeout_seconds = static_cast<int>(
      std::chrono::duration_cast<std::chrono::seconds>(d.idleTimeout).count());
  options->static_dir = nullptr;
  options->on_ready = nullptr;
  options->user = nullptr;
}

spectra_status spectra_serve(const spectra_serve_options* options) {
  return guarded([&] {
    requireArg(options, "options");
    spectra::preview::ServerOptions o;
    if (options->host != nullptr) o.host = options->host;
    o.port = options->port;
    o.previewStride = options->preview_stride;
    if (options->idle_timeout_seconds < 1) {
      spectra::fail(spectra::ErrorCode::kInvalid, "idle timeout must be >= 1 second");
    }
    o.idleTimeout = std::chrono::seconds(options->idle_timeout_seconds);
    if (options->static_dir != nullptr) o.staticDir = options->static_dir;
    spectra::preview::Server server(std::move(o));
    const int port = server.bind();
    if (options->on_ready != nullptr) options->on_ready(port, options->user);
    server.listen();
  });
}

}  // extern "C"
