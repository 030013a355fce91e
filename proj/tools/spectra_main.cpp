// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

// spectra: command-line front end over libspectra.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectra/spectra.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kInput = 2, kSchema = 3, kUsage = 4 };

int exitCodeFor(spectra_status status) {
  switch (status) {
    case SPECTRA_OK: return kOk;
    case SPECTRA_ERR_IO:
    case SPECTRA_ERR_NOT_FOUND: return kInput;
    case SPECTRA_ERR_FORMAT: return kSchema;
    case SPECTRA_ERR_INVALID:
    case SPECTRA_ERR_OUT_OF_BOUNDS: return kUsage;
    default: return kInternal;
  }
}

/// Carries a failure from deep in a command to main().
struct CommandError {
  int exitCode;
  std::string message;
};

void check(spectra_status status) {
  if (status != SPECTRA_OK) {
    throw CommandError{exitCodeFor(status),
                       std::string(spectra_last_error()) + " [" + spectra_status_name(status) + "]"};
  }
}

[[noreturn]] void usageError(const std::string& message) { throw CommandError{kUsage, message}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using CubePtr = std::unique_ptr<spectra_cube, Deleter<spectra_cube, spectra_cube_free>>;
using ImagePtr = std::unique_ptr<spectra_image, Deleter<spectra_image, spectra_image_free>>;
using PointsPtr = std::unique_ptr<spectra_points, Deleter<spectra_points, spectra_points_free>>;

CubePtr readCube(const std::string& path) {
  spectra_cube* raw = nullptr;
  check(spectra_cube_read(path.c_str(), &raw));
  return CubePtr(raw);
}

ImagePtr readImage(const std::string& path, std::vector<std::string>& warnings) {
  spectra_image* raw = nullptr;
  check(spectra_image_read(path.c_str(), &raw));
  ImagePtr image(raw);
  for (size_t i = 0; i < spectra_image_warning_count(raw); ++i) {
    warnings.push_back(path + ": " + spectra_image_warning(raw, i));
  }
  return image;
}

PointsPtr readPoints(const std::string& path) {
  spectra_points* raw = nullptr;
  check(spectra_points_read(path.c_str(), &raw));
  return PointsPtr(raw);
}

/// Run report written beside an output as `<output>.report.json`.
class RunReport {
 public:
  explicit RunReport(std::string command) { doc_["command"] = std::move(command); }

  void input(const std::string& path) { doc_["inputs"].push_back(path); }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  void warn(const std::string& message) {
    std::cerr << "spectra: warning: " << message << "\n";
    doc_["warnings"].push_back(message);
  }
  json& operator[](const char* key) { return doc_[key]; }

  template <typename F>
  auto timed(const char* stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record(stage, start);
    } else {
      auto result = body();
      record(stage, start);
      return result;
    }
  }

  void write(const fs::path& path) {
    for (const char* key : {"inputs", "outputs", "warnings"}) {
      if (!doc_.contains(key)) doc_[key] = json::array();
    }
    std::ofstream out(path, std::ios::binary);
    out << doc_.dump(2) << "\n";
    if (!out) throw CommandError{kInput, "cannot write report " + path.string()};
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    doc_["timings_ms"][stage] = std::chrono::duration<double, std::milli>(elapsed).count();
  }

  json doc_;
};

fs::path reportPath(const std::string& output) { return output + ".report.json"; }

json homographyJson(const double* h) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({h[3 * r], h[3 * r + 1], h[3 * r + 2]});
  return rows;
}

/// Accepts a JSON file (a match report with "homography", or a bare 3x3
/// array) or nine comma-separated numbers in row-major order.
std::array<double, 9> parseHomography(const std::string& value) {
  std::array<double, 9> h{};
  std::error_code ec;
  if (fs::is_regular_file(value, ec)) {
    std::ifstream in(value);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw CommandError{kSchema, "homography file " + value + ": " + e.what()};
    }
    const json& m = doc.is_object() && doc.contains("homography") ? doc["homography"] : doc;
    bool ok = m.is_array() && m.size() == 3;
    for (int r = 0; ok && r < 3; ++r) {
      ok = m[r].is_array() && m[r].size() == 3;
      for (int c = 0; ok && c < 3; ++c) {
        ok = m[r][c].is_number();
        if (ok) h[3 * r + c] = m[r][c].get<double>();
      }
    }
    if (!ok) throw CommandError{kSchema, "homography file " + value + ": expected a 3x3 array"};
    return h;
  }
  std::stringstream ss(value);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 9) usageError("--warp-homography: expected 9 numbers or a file");
    try {
      std::size_t used = 0;
      h[n] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usageError("--warp-homography: '" + value + "' is neither a file nor 9 numbers");
    }
    ++n;
  }
  if (n != 9) usageError("--warp-homography: '" + value + "' is neither a file nor 9 numbers");
  return h;
}

struct Options {
  int threads = 0;
  bool threadsGiven = false;

  std::string cube, rgb, points, output, image, reference;

  spectra_match_config match{};
  std::string sensor;

  spectra_mls_config mls{};
  bool ridgeAbsolute = false;
  bool noDedup = false;
  int previewStride = 1;
  std::string expectSensor;

  std::string warp;

  std::string host = "127.0.0.1";
  int port = 8080;
  int servePreviewStride = 4;
  int idleTimeout = 1800;
  std::string staticDir;

  int width = 64, height = 64, bands = 16;
  std::uint64_t synthSeed = 1;
};

int resolveThreads(const Options& o) {
  if (o.threadsGiven) return o.threads;
  const char* env = std::getenv("SPECTRA_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (*end != '\0' || value < 0 || value > 4096) {
    usageError(std::string("SPECTRA_THREADS must be a non-negative integer, got '") + env + "'");
  }
  return static_cast<int>(value);
}

int cmdMatch(const Options& o) {
  RunReport report("match");
  report.input(o.cube);
  report.input(o.rgb);
  const int threads = resolveThreads(o);
  std::vector<std::string> warnings;
  CubePtr cube = report.timed("read_cube", [&] { return readCube(o.cube); });
  ImagePtr image = report.timed("read_rgb", [&] { return readImage(o.rgb, warnings); });
  for (const auto& w : warnings) report.warn(w);

  spectra_match_report mr{};
  PointsPtr points = report.timed("match", [&] {
    spectra_points* raw = nullptr;
    check(spectra_match(cube.get(), image.get(), &o.match, o.sensor.c_str(), threads, &raw, &mr));
    return PointsPtr(raw);
  });
  report.timed("write", [&] { check(spectra_points_write(points.get(), o.output.c_str())); });
  report.output(o.output);

  report["homography"] = homographyJson(mr.homography);
  report["keypoints"] = {{"cube", mr.cube_keypoints}, {"rgb", mr.image_keypoints}};
  report["correspondences"] = mr.correspondences;
  report["inliers"] = mr.inliers;
  report["mean_inlier_error_px"] = mr.mean_inlier_error;
  report["sampled"] = mr.sampled;
  report["skipped"] = {{"zero_signature", mr.skipped_zero},
                       {"out_of_bounds", mr.skipped_out_of_bounds}};
  report["pairs"] = spectra_points_size(points.get());
  report["config"] = {{"sample_fraction", o.match.sample_fraction},
                      {"window_radius", o.match.window_radius},
                      {"ratio_threshold", o.match.ratio_threshold},
                      {"ransac_iterations", o.match.ransac_iterations},
                      {"ransac_inlier_tol", o.match.ransac_inlier_tol},
                      {"seed", o.match.seed},
                      {"threads", threads}};
  report.write(reportPath(o.output));
  std::cout << "wrote " << spectra_points_size(points.get()) << " control points to " << o.output
            << " (" << mr.inliers << "/" << mr.correspondences << " inliers)\n";
  return kOk;
}

int cmdRender(const Options& o) {
  RunReport report("render");
  report.input(o.cube);
  report.input(o.points);
  const int threads = resolveThreads(o);
  CubePtr cube = report.timed("read_cube", [&] { return readCube(o.cube); });
  PointsPtr points = report.timed("read_points", [&] { return readPoints(o.points); });

  const std::string sensor = spectra_points_sensor(points.get());
  if (!o.expectSensor.empty() && sensor != o.expectSensor) {
    report.warn("control points come from sensor '" + sensor + "', expected '" + o.expectSensor +
                "'");
  }

  spectra_mls_config mls = o.mls;
  mls.ridge_relative = o.ridgeAbsolute ? 0 : 1;
  mls.dedup = o.noDedup ? 0 : 1;
  spectra_render_stats stats{};
  ImagePtr image = report.timed("render", [&] {
    spectra_image* raw = nullptr;
    check(spectra_render(cube.get(), points.get(), &mls, threads, o.previewStride, &raw, &stats));
    return ImagePtr(raw);
  });
  report.timed("write", [&] { check(spectra_image_write(image.get(), o.output.c_str())); });
  report.output(o.output);

  int w = 0, h = 0;
  spectra_image_dims(image.get(), &w, &h);
  report["size"] = {w, h};
  report["pairs"] = spectra_points_size(points.get());
  report["sensor"] = sensor;
  report["solves"] = stats.solves;
  report["zero_pixels"] = stats.zero_pixels;
  report["config"] = {{"sad_epsilon", mls.sad_epsilon},
                      {"ridge_lambda", mls.ridge_lambda},
                      {"ridge_relative", mls.ridge_relative != 0},
                      {"beta", mls.weight_exponent},
                      {"dedup", mls.dedup != 0},
                      {"preview_stride", o.previewStride},
                      {"threads", threads}};
  report.write(reportPath(o.output));
  std::cout << "rendered " << w << "x" << h << " to " << o.output << "\n";
  return kOk;
}

int cmdMetrics(const Options& o) {
  RunReport report("metrics");
  report.input(o.image);
  std::vector<std::string> warnings;
  ImagePtr image = readImage(o.image, warnings);
  ImagePtr reference;
  if (!o.reference.empty()) {
    report.input(o.reference);
    reference = readImage(o.reference, warnings);
  } else if (!o.warp.empty()) {
    usageError("--warp-homography needs a reference image");
  }
  for (const auto& w : warnings) report.warn(w);

  std::optional<std::array<double, 9>> h;
  if (!o.warp.empty()) h = parseHomography(o.warp);
  if (reference && !h) {
    int w1 = 0, h1 = 0, w2 = 0, h2 = 0;
    spectra_image_dims(image.get(), &w1, &h1);
    spectra_image_dims(reference.get(), &w2, &h2);
    if (w1 != w2 || h1 != h2) {
      usageError("size mismatch: " + std::to_string(w1) + "x" + std::to_string(h1) + " vs " +
                 std::to_string(w2) + "x" + std::to_string(h2) +
                 "; register the reference with --warp-homography");
    }
  }

  spectra_metric_report m{};
  report.timed("metrics", [&] {
    check(spectra_metrics(image.get(), reference.get(), h ? h->data() : nullptr, &m));
  });

  json metrics;
  metrics["entropy_bits"] = m.entropy_bits;
  metrics["rmse"] = m.has_rmse ? json(m.rmse) : json(nullptr);
  metrics["pixel_count"] = m.pixel_count;
  std::cout << metrics.dump(2) << "\n";

  if (!o.output.empty()) {
    for (const auto& [key, value] : metrics.items()) report[key.c_str()] = value;
    if (h) report["homography"] = homographyJson(h->data());
    report.output(o.output);
    report.write(o.output);
  }
  return kOk;
}

int cmdSynth(const Options& o) {
  spectra_cube* rawCube = nullptr;
  spectra_image* rawImage = nullptr;
  check(spectra_synthetic_scene(o.width, o.height, o.bands, o.synthSeed, &rawCube, &rawImage));
  CubePtr cube(rawCube);
  ImagePtr image(rawImage);
  const std::string header = o.output + ".hdr";
  const std::string png = o.output + ".png";
  check(spectra_cube_write(cube.get(), header.c_str()));
  check(spectra_image_write(image.get(), png.c_str()));
  std::cout << "wrote " << header << " and " << png << "\n";
  return kOk;
}

void announce(int port, void* user) {
  const auto* host = static_cast<const std::string*>(user);
  std::cout << "serving on http://" << *host << ":" << port << "/\n" << std::flush;
}

int cmdServe(const Options& o) {
  spectra_serve_options s;
  spectra_serve_options_default(&s);
  s.host = o.host.c_str();
  s.port = o.port;
  s.preview_stride = o.servePreviewStride;
  s.idle_timeout_seconds = o.idleTimeout;
  s.static_dir = o.staticDir.empty() ? nullptr : o.staticDir.c_str();
  s.on_ready = announce;
  s.user = const_cast<std::string*>(&o.host);
  check(spectra_serve(&s));
  return kOk;
}

CLI::Validator openUnitInterval() {
  return CLI::Validator(
      [](std::string& value) -> std::string {
        try {
          const double v = std::stod(value);
          if (v > 0.0 && v <= 1.0) return {};
        } catch (const std::exception&) {
        }
        return "must be in (0, 1], got " + value;
      },
      "(0,1]");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  spectra_match_config_default(&o.match);
  spectra_mls_config_default(&o.mls);

  CLI::App app{"Natural-color rendering of hyperspectral cubes from matched control points"};
  app.set_version_flag("--version", spectra_version());
  app.require_subcommand(1);
  app.fallthrough();
  auto* threads = app.add_option("--threads", o.threads, "Worker threads, 0 = all cores (env SPECTRA_THREADS)")
                      ->check(CLI::NonNegativeNumber);

  auto* match = app.add_subcommand("match", "Register a cube to a reference image and sample control points");
  match->add_option("cube", o.cube, "Cube header (.hdr)")->required();
  match->add_option("rgb", o.rgb, "Reference image (PNG)")->required();
  match->add_option("-o,--output", o.output, "Control-point file to write")->required();
  match->add_option("--sample-fraction", o.match.sample_fraction, "Share of cube pixels to sample")
      ->check(openUnitInterval())
      ->capture_default_str();
  match->add_option("--window-radius", o.match.window_radius, "Refinement window radius")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  match->add_option("--ratio", o.match.ratio_threshold, "Descriptor ratio-test threshold")
      ->capture_default_str();
  match->add_option("--ransac-iterations", o.match.ransac_iterations)->capture_default_str();
  match->add_option("--ransac-tolerance", o.match.ransac_inlier_tol, "Inlier tolerance, pixels")
      ->capture_default_str();
  match->add_option("--seed", o.match.seed, "Sampling and RANSAC seed")->capture_default_str();
  match->add_option("--sensor", o.sensor, "Sensor tag stored with the control points");

  auto* render = app.add_subcommand("render", "Render a cube through control points");
  render->add_option("cube", o.cube, "Cube header (.hdr)")->required();
  render->add_option("points", o.points, "Control-point file")->required();
  render->add_option("-o,--output", o.output, "PNG to write")->required();
  render->add_option("--ridge-lambda", o.mls.ridge_lambda,
                     "Ridge weight, relative to the mean diagonal unless --ridge-absolute")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  render->add_flag("--ridge-absolute", o.ridgeAbsolute, "Use --ridge-lambda as an absolute value");
  render->add_option("--sad-epsilon", o.mls.sad_epsilon, "Spectral angle floor, radians")
      ->capture_default_str();
  render->add_option("--beta", o.mls.weight_exponent, "Inverse-angle weight exponent")
      ->capture_default_str();
  render->add_option("--preview-stride", o.previewStride, "Render every n-th pixel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  render->add_flag("--no-dedup", o.noDedup, "Solve every pixel, even repeated signatures");
  render->add_option("--expect-sensor", o.expectSensor, "Warn when the points come from another sensor");

  auto* metrics = app.add_subcommand("metrics", "Entropy and RMSE of a rendering");
  metrics->add_option("image", o.image, "Rendered PNG")->required();
  metrics->add_option("reference", o.reference, "Reference PNG");
  metrics->add_option("--warp-homography", o.warp,
                      "Image-to-reference homography: match report, 3x3 JSON array, or 9 numbers");
  metrics->add_option("-o,--output", o.output, "Report file to write");

  auto* serve = app.add_subcommand("serve", "Run the interactive preview service");
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--preview-stride", o.servePreviewStride)->check(CLI::PositiveNumber)->capture_default_str();
  serve->add_option("--idle-timeout", o.idleTimeout, "Session expiry, seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--static-dir", o.staticDir, "Directory served at /")->check(CLI::ExistingDirectory);

  auto* synth = app.add_subcommand("synth", "Write a synthetic cube and matching PNG");
  synth->add_option("output", o.output, "Output stem; writes <stem>.hdr, <stem>.raw, <stem>.png")->required();
  synth->add_option("--width", o.width)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--height", o.height)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--bands", o.bands)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--seed", o.synthSeed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  o.threadsGiven = threads->count() > 0;

  try {
    if (*match) return cmdMatch(o);
    if (*render) return cmdRender(o);
    if (*metrics) return cmdMetrics(o);
    if (*serve) return cmdServe(o);
    if (*synth) return cmdSynth(o);
  } catch (const CommandError& e) {
    std::cerr << "spectra: error: " << e.message << "\n";
    return e.exitCode;
  } catch (const std::exception& e) {
    std::cerr << "spectra: error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
