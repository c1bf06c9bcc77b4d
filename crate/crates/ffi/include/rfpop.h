/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef RFPOP_H
#define RFPOP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfpopLoss {
  RFPOP_LOSS_L2 = 0,
  RFPOP_LOSS_L1 = 1,
  RFPOP_LOSS_HUBER = 2,
  RFPOP_LOSS_BIWEIGHT = 3,
  RFPOP_LOSS_QUANTILE = 4,
} RfpopLoss;

/**
 * Result code of every call.
 */
typedef enum RfpopStatus {
  RFPOP_STATUS_OK = 0,
  RFPOP_STATUS_NULL_POINTER = 1,
  RFPOP_STATUS_INVALID_ARGUMENT = 2,
  RFPOP_STATUS_NON_FINITE = 3,
  RFPOP_STATUS_DEGENERATE_SCALE = 4,
  RFPOP_STATUS_TOO_SHORT = 5,
  RFPOP_STATUS_BUFFER_TOO_SMALL = 6,
  RFPOP_STATUS_PANIC = 7,
} RfpopStatus;

/**
 * Streaming detector state.
 */
typedef struct RfpopOnline RfpopOnline;

/**
 * A finished segmentation.
 */
typedef struct RfpopSegmentation RfpopSegmentation;

/**
 * Loss and penalty. `k` is read only by Huber and biweight, `quantile`
 * only by the quantile loss.
 */
typedef struct RfpopParams {
  enum RfpopLoss loss;
  double k;
  double quantile;
  double beta;
} RfpopParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Fills `out` with the default K, quantile level and β for `data`.
 *
 * # Safety
 * `data` must point to `n` doubles; `out` must be writable.
 */
enum RfpopStatus rfpop_default_params(enum RfpopLoss loss,
                                      const double *data,
                                      size_t n,
                                      struct RfpopParams *out);

/**
 * Segments `data` in one call.
 *
 * # Safety
 * `data` must point to `n` doubles, `params` must be readable and `out`
 * writable. On success `*out` owns a handle for
 * [`rfpop_segmentation_free`].
 */
enum RfpopStatus rfpop_detect(const double *data,
                              size_t n,
                              const struct RfpopParams *params,
                              struct RfpopSegmentation **out);

/**
 * Creates a streaming detector.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum RfpopStatus rfpop_online_new(const struct RfpopParams *params, struct RfpopOnline **out);

/**
 * Feeds one observation. Either output pointer may be null.
 *
 * # Safety
 * `handle` must come from [`rfpop_online_new`]; non-null outputs must be
 * writable.
 */
enum RfpopStatus rfpop_online_push(struct RfpopOnline *handle,
                                   double y,
                                   size_t *most_recent_cp,
                                   double *cost);

/**
 * Number of observations consumed so far.
 *
 * # Safety
 * `handle` must come from [`rfpop_online_new`]; `out` must be writable.
 */
enum RfpopStatus rfpop_online_len(const struct RfpopOnline *handle, size_t *out);

/**
 * Optimal segmentation of the data seen so far; the detector stays usable.
 *
 * # Safety
 * `handle` must come from [`rfpop_online_new`]; `out` must be writable.
 */
enum RfpopStatus rfpop_online_segment(const struct RfpopOnline *handle,
                                      struct RfpopSegmentation **out);

/**
 * # Safety
 * `handle` must be null or come from [`rfpop_online_new`], and must not be
 * used afterwards.
 */
void rfpop_online_free(struct RfpopOnline *handle);

/**
 * Number of changepoints; there are one more segment means.
 *
 * # Safety
 * `seg` must be a live segmentation handle; `out` must be writable.
 */
enum RfpopStatus rfpop_segmentation_len(const struct RfpopSegmentation *seg, size_t *out);

/**
 * # Safety
 * `seg` must be a live segmentation handle; `out` must be writable.
 */
enum RfpopStatus rfpop_segmentation_total_cost(const struct RfpopSegmentation *seg, double *out);

/**
 * Copies the 1-based changepoints (last index of each segment but the
 * final one) into `buf`, which must hold at least
 * [`rfpop_segmentation_len`] elements.
 *
 * # Safety
 * `seg` must be a live segmentation handle; `buf` must hold `cap` elements.
 */
enum RfpopStatus rfpop_segmentation_changepoints(const struct RfpopSegmentation *seg,
                                                 size_t *buf,
                                                 size_t cap);

/**
 * Copies the fitted segment locations; `buf` needs one more element than
 * there are changepoints.
 *
 * # Safety
 * `seg` must be a live segmentation handle; `buf` must hold `cap` elements.
 */
enum RfpopStatus rfpop_segmentation_means(const struct RfpopSegmentation *seg,
                                          double *buf,
                                          size_t cap);

/**
 * # Safety
 * `seg` must be null or a live segmentation handle, not used afterwards.
 */
void rfpop_segmentation_free(struct RfpopSegmentation *seg);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `cap` bytes, and returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or hold `cap` bytes.
 */
size_t rfpop_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rfpop_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RFPOP_H */
