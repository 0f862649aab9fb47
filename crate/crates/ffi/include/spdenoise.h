#ifndef SPDENOISE_H
#define SPDENOISE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpdNoiseModel {
  /**
   * Pepper in `[0, 0.1]`, salt in `[0.9, 1]`.
   */
  SPD_NOISE_MODEL_INTERVAL = 0,
  /**
   * Pepper exactly 0, salt exactly 1.
   */
  SPD_NOISE_MODEL_FIXED = 1,
} SpdNoiseModel;

/**
 * Result code of every fallible call.
 */
typedef enum SpdStatus {
  SPD_STATUS_OK = 0,
  SPD_STATUS_NULL_POINTER = 1,
  SPD_STATUS_INVALID_ARGUMENT = 2,
  SPD_STATUS_DIMENSION_MISMATCH = 3,
  SPD_STATUS_IO = 4,
  SPD_STATUS_FORMAT = 5,
  SPD_STATUS_UNDEFINED = 6,
  SPD_STATUS_PANIC = 7,
} SpdStatus;

/**
 * Opaque grayscale image.
 */
typedef struct SpdImage SpdImage;

/**
 * Block autoencoder settings. `use_adam = false` selects plain gradient
 * descent; Adam runs with betas 0.9 / 0.999 and epsilon 1e-7.
 */
typedef struct SpdAeParams {
  size_t block_h;
  size_t block_w;
  size_t window;
  size_t epochs;
  double learning_rate;
  double compression_ratio;
  uint64_t seed;
  bool use_adam;
} SpdAeParams;

typedef struct SpdTwoMfParams {
  size_t w1;
  size_t w2;
  double thr1_w1;
  double thr1_w2;
  double thr2;
  size_t passes;
} SpdTwoMfParams;

typedef struct SpdMfsAeParams {
  size_t w1;
  size_t w2;
  double thr_min;
  double thr_max;
  double thr_step;
  double thr_w2;
  size_t passes;
  struct SpdAeParams ae;
  double thr_final;
} SpdMfsAeParams;

/**
 * Image SSIM and SSIM of the standard and dilated entropy maps.
 */
typedef struct SpdScores {
  double ssim_img;
  double ssim_map;
  double ssim_map_dilated;
} SpdScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated library version.
 */
const char *spd_version(void);

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next call into the library on the same thread.
 */
const char *spd_last_error_message(void);

/**
 * Creates an image from `width * height` row-major intensities in `[0, 1]`.
 *
 * # Safety
 * `pixels` must point to `width * height` readable doubles and `out` to a
 * writable handle slot.
 */
enum SpdStatus spd_image_new(size_t width,
                             size_t height,
                             const double *pixels,
                             struct SpdImage **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `img` must be null or a handle from this library that has not been freed.
 */
void spd_image_free(struct SpdImage *img);

/**
 * Width in pixels, 0 for null.
 *
 * # Safety
 * `img` must be null or a live handle.
 */
size_t spd_image_width(const struct SpdImage *img);

/**
 * Height in pixels, 0 for null.
 *
 * # Safety
 * `img` must be null or a live handle.
 */
size_t spd_image_height(const struct SpdImage *img);

/**
 * Copies the intensities into `dst`, which must hold `len >= width * height` doubles.
 *
 * # Safety
 * `img` must be a live handle and `dst` must point to `len` writable doubles.
 */
enum SpdStatus spd_image_copy_pixels(const struct SpdImage *img, double *dst, size_t len);

/**
 * Loads an 8-bit grayscale PNG or PGM.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum SpdStatus spd_image_load(const char *path, struct SpdImage **out);

/**
 * Saves as binary PGM when the path ends in `.pgm`, PNG otherwise.
 *
 * # Safety
 * `img` must be a live handle and `path` a NUL-terminated string.
 */
enum SpdStatus spd_image_save(const struct SpdImage *img, const char *path);

/**
 * Corrupts `level` percent of the pixels with salt-and-pepper noise.
 *
 * # Safety
 * `img` must be a live handle and `out` a writable handle slot.
 */
enum SpdStatus spd_add_noise(const struct SpdImage *img,
                             enum SpdNoiseModel model,
                             double level,
                             uint64_t seed,
                             struct SpdImage **out);

/**
 * One plain median pass with a square window of odd side `window`.
 *
 * # Safety
 * `img` must be a live handle and `out` a writable handle slot.
 */
enum SpdStatus spd_median_pass(const struct SpdImage *img, size_t window, struct SpdImage **out);

/**
 * Recursive threshold median filter: `passes` median passes, each merged
 * with the input image under `threshold`.
 *
 * # Safety
 * `img` must be a live handle and `out` a writable handle slot.
 */
enum SpdStatus spd_recursive_median(const struct SpdImage *img,
                                    size_t window,
                                    double threshold,
                                    size_t passes,
                                    struct SpdImage **out);

/**
 * Recursive threshold loop around the block autoencoder.
 *
 * # Safety
 * `img` and `params` must be valid and `out` a writable handle slot.
 */
enum SpdStatus spd_recursive_ae(const struct SpdImage *img,
                                const struct SpdAeParams *params,
                                double threshold,
                                size_t passes,
                                struct SpdImage **out);

/**
 * Defaults of the two-window median scheme.
 */
struct SpdTwoMfParams spd_two_mf_params_default(void);

/**
 * Two recursive median filters of different window size merged under a
 * final threshold.
 *
 * # Safety
 * `img` and `params` must be valid and `out` a writable handle slot.
 */
enum SpdStatus spd_denoise_2mf(const struct SpdImage *img,
                               const struct SpdTwoMfParams *params,
                               struct SpdImage **out);

/**
 * Defaults of the median bank plus autoencoder fusion scheme.
 */
struct SpdMfsAeParams spd_mfs_ae_params_default(void);

/**
 * Defaults of the single-image autoencoder.
 */
struct SpdAeParams spd_ae_params_default(void);

/**
 * Bank of small-window median filters fused by the block autoencoder,
 * merged with a large-window median filter.
 *
 * # Safety
 * `img` and `params` must be valid and `out` a writable handle slot.
 */
enum SpdStatus spd_denoise_mfs_ae(const struct SpdImage *img,
                                  const struct SpdMfsAeParams *params,
                                  struct SpdImage **out);

/**
 * Mean SSIM of two equally sized images.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` a writable double.
 */
enum SpdStatus spd_ssim(const struct SpdImage *a, const struct SpdImage *b, double *out);

/**
 * Image SSIM plus SSIM of the standard and dilated entropy maps.
 *
 * # Safety
 * `clean` and `restored` must be live handles and `out` writable.
 */
enum SpdStatus spd_scores(const struct SpdImage *clean,
                          const struct SpdImage *restored,
                          struct SpdScores *out);

/**
 * Normalised sample-entropy map, optionally dilated by a 5x5 max filter.
 *
 * # Safety
 * `img` must be a live handle and `out` a writable handle slot.
 */
enum SpdStatus spd_entropy_map(const struct SpdImage *img, bool dilated, struct SpdImage **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPDENOISE_H */
