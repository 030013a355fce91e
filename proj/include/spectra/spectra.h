/* Copyright 2026 The Spectra Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libspectra. Objects are opaque handles released with the
 * matching *_free function. Every fallible call returns a spectra_status;
 * on failure spectra_last_error() describes the most recent error raised
 * on the calling thread.
 */

#ifndef SPECTRA_SPECTRA_H_
#define SPECTRA_SPECTRA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SPECTRA_BUILDING_LIBRARY)
#define SPECTRA_API __attribute__((visibility("default")))
#else
#define SPECTRA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spectra_status {
  SPECTRA_OK = 0,
  SPECTRA_ERR_INTERNAL = 1,
  SPECTRA_ERR_IO = 2,
  SPECTRA_ERR_FORMAT = 3,
  SPECTRA_ERR_INVALID = 4,
  SPECTRA_ERR_SINGULAR = 5,
  SPECTRA_ERR_OUT_OF_BOUNDS = 6,
  SPECTRA_ERR_NOT_FOUND = 7,
  SPECTRA_ERR_ESTIMATION = 8
} spectra_status;

typedef struct spectra_cube spectra_cube;
typedef struct spectra_image spectra_image;
typedef struct spectra_points spectra_points;

SPECTRA_API const char* spectra_version(void);
/* Message of the last failure on this thread; empty when none. */
SPECTRA_API const char* spectra_last_error(void);
/* Stable lowercase name, e.g. "out_of_bounds". */
SPECTRA_API const char* spectra_status_name(spectra_status status);

/* Spectral cubes: header + raw sample file. */
SPECTRA_API spectra_status spectra_cube_read(const char* header_path, spectra_cube** out);
/* Band-sequential float32 little-endian. */
SPECTRA_API spectra_status spectra_cube_write(const spectra_cube* cube, const char* header_path);
SPECTRA_API void spectra_cube_dims(const spectra_cube* cube, int* width, int* height, int* bands);
SPECTRA_API void spectra_cube_free(spectra_cube* cube);

/* 8-bit RGB images (PNG). */
SPECTRA_API spectra_status spectra_image_read(const char* path, spectra_image** out);
SPECTRA_API spectra_status spectra_image_write(const spectra_image* image, const char* path);
SPECTRA_API void spectra_image_dims(const spectra_image* image, int* width, int* height);
/* Interleaved RGB rows, width * height * 3 bytes. */
SPECTRA_API const uint8_t* spectra_image_pixels(const spectra_image* image);
/* Warnings raised while decoding, e.g. a dropped alpha channel. */
SPECTRA_API size_t spectra_image_warning_count(const spectra_image* image);
SPECTRA_API const char* spectra_image_warning(const spectra_image* image, size_t index);
SPECTRA_API void spectra_image_free(spectra_image* image);

/* Control-point files. */
SPECTRA_API spectra_status spectra_points_read(const char* path, spectra_points** out);
SPECTRA_API spectra_status spectra_points_write(const spectra_points* points, const char* path);
SPECTRA_API size_t spectra_points_size(const spectra_points* points);
SPECTRA_API int spectra_points_bands(const spectra_points* points);
SPECTRA_API const char* spectra_points_sensor(const spectra_points* points);
SPECTRA_API void spectra_points_free(spectra_points* points);

typedef struct spectra_mls_config {
  double sad_epsilon;
  double ridge_lambda;
  int ridge_relative; /* nonzero: ridge_lambda scales trace(N) / p */
  double weight_exponent;
  int dedup;
} spectra_mls_config;

SPECTRA_API void spectra_mls_config_default(spectra_mls_config* config);

typedef struct spectra_render_stats {
  size_t solves;
  size_t zero_pixels;
} spectra_render_stats;

/* threads = 0 uses every hardware thread. stats may be NULL. */
SPECTRA_API spectra_status spectra_render(const spectra_cube* cube, const spectra_points* points,
                                          const spectra_mls_config* config, int threads,
                                          int preview_stride, spectra_image** out,
                                          spectra_render_stats* stats);

typedef struct spectra_match_config {
  int window_radius;
  double sample_fraction;
  double ratio_threshold;
  int ransac_iterations;
  double ransac_inlier_tol;
  uint64_t seed;
} spectra_match_config;

SPECTRA_API void spectra_match_config_default(spectra_match_config* config);

typedef struct spectra_match_report {
  double homography[9]; /* row-major, cube pixel -> image pixel */
  size_t cube_keypoints;
  size_t image_keypoints;
  size_t correspondences;
  size_t inliers;
  double mean_inlier_error;
  size_t sampled;
  size_t skipped_zero;
  size_t skipped_out_of_bounds;
} spectra_match_report;

/* sensor may be NULL. report may be NULL. */
SPECTRA_API spectra_status spectra_match(const spectra_cube* cube, const spectra_image* image,
                                         const spectra_match_config* config, const char* sensor,
                                         int threads, spectra_points** out,
                                         spectra_match_report* report);

typedef struct spectra_metric_report {
  double entropy_bits;
  int has_rmse;
  double rmse;
  size_t pixel_count;
} spectra_metric_report;

/* reference and homography (row-major 3x3, image pixel -> reference pixel)
 * may be NULL. Without a homography the sizes must match. */
SPECTRA_API spectra_status spectra_metrics(const spectra_image* image,
                                           const spectra_image* reference,
                                           const double* homography,
                                           spectra_metric_report* report);

/* Synthetic textured scene and its nonlinear spectral lift. */
SPECTRA_API spectra_status spectra_synthetic_scene(int width, int height, int bands, uint64_t seed,
                                                   spectra_cube** cube, spectra_image** image);

typedef struct spectra_serve_options {
  const char* host;       /* NULL: 127.0.0.1 */
  int port;               /* 0 picks a free port */
  int preview_stride;
  int idle_timeout_seconds;
  const char* static_dir; /* NULL or empty: no static files */
  /* Called once the socket is bound, before serving. May be NULL. */
  void (*on_ready)(int port, void* user);
  void* user;
} spectra_serve_options;

SPECTRA_API void spectra_serve_options_default(spectra_serve_options* options);
/* Runs the preview HTTP service until the process ends. */
SPECTRA_API spectra_status spectra_serve(const spectra_serve_options* options);

#ifdef __cplusplus
}
#endif

#endif /* SPECTRA_SPECTRA_H_ */
