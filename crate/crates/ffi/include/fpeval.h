#ifndef FPEVAL_H
#define FPEVAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum FpStatus {
  FP_STATUS_OK = 0,
  FP_STATUS_NULL_ARGUMENT = 1,
  FP_STATUS_INVALID_UTF8 = 2,
  FP_STATUS_IO = 3,
  FP_STATUS_FORMAT = 4,
  FP_STATUS_DOMAIN = 5,
  FP_STATUS_NOT_OBSERVED = 6,
  FP_STATUS_INSUFFICIENT_DATA = 7,
  FP_STATUS_CONFIG = 8,
  FP_STATUS_SAMPLE_TOO_LARGE = 9,
  FP_STATUS_SPEC = 10,
  FP_STATUS_MISSING_RESOLUTION = 11,
  FP_STATUS_PANIC = 12,
} FpStatus;

typedef enum FpFormat {
  /**
   * Guess from the file extension.
   */
  FP_FORMAT_AUTO = 0,
  FP_FORMAT_CSV = 1,
  FP_FORMAT_JSONL = 2,
} FpFormat;

typedef enum FpPolicy {
  FP_POLICY_INCONCLUSIVE_AS_MASKED = 0,
  FP_POLICY_INCONCLUSIVE_AS_UNMASKED = 1,
} FpPolicy;

/**
 * Opaque fingerprint dataset.
 */
typedef struct FpDataset FpDataset;

/**
 * Opaque mask model.
 */
typedef struct FpMaskModel FpMaskModel;

/**
 * Opaque observation log.
 */
typedef struct FpObservationLog FpObservationLog;

typedef struct FpTrackability {
  size_t n;
  double entropy_bits;
  double pct_le_1;
  double pct_le_10;
} FpTrackability;

typedef struct FpHybridReport {
  struct FpTrackability before;
  struct FpTrackability after;
  double eff_entropy;
  double eff_pct_le_1;
  double eff_pct_le_10;
} FpHybridReport;

typedef struct FpEstimate {
  double entropy_mean;
  double entropy_sem;
  double pct_le_1_mean;
  double pct_le_1_sem;
  double pct_le_10_mean;
  double pct_le_10_sem;
  size_t samples;
  size_t sample_size;
  uint64_t seed;
} FpEstimate;

typedef struct FpSpoofStrategy {
  uint32_t cap_w;
  uint32_t cap_h;
  uint32_t quant_w;
  uint32_t quant_h;
} FpSpoofStrategy;

typedef struct FpStrategyScore {
  double entropy_bits;
  double pct_le_1;
  double pct_le_10;
  double abs_loss;
  double pct_loss;
} FpStrategyScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fp_last_error_message(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *fp_version(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FpStatus fp_dataset_load(const char *path, enum FpFormat format, struct FpDataset **out);

/**
 * # Safety
 * `d` must come from this library and not be used afterwards. NULL is a no-op.
 */
void fp_dataset_free(struct FpDataset *d);

/**
 * Number of records, or 0 for NULL.
 *
 * # Safety
 * `d` must be NULL or a live dataset handle.
 */
size_t fp_dataset_len(const struct FpDataset *d);

/**
 * # Safety
 * `d` must be a live handle and `path` a NUL-terminated string.
 */
enum FpStatus fp_dataset_save(const struct FpDataset *d, const char *path, enum FpFormat format);

/**
 * Deduplicates by cookie and drops records tripping a sanitization rule.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum FpStatus fp_dataset_prepare(const struct FpDataset *d, struct FpDataset **out);

/**
 * # Safety
 * `d` must be a live handle; `chrome` and `firefox` valid pointers.
 */
enum FpStatus fp_dataset_split(const struct FpDataset *d,
                               struct FpDataset **chrome,
                               struct FpDataset **firefox);

/**
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum FpStatus fp_trackability(const struct FpDataset *d, struct FpTrackability *out);

/**
 * Entropy in bits of the distribution given by anonymity-set sizes.
 *
 * # Safety
 * `counts` must point to `len` readable values; `out` must be valid.
 */
enum FpStatus fp_entropy_from_counts(const size_t *counts, size_t len, double *out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FpStatus fp_log_load(const char *path, struct FpObservationLog **out);

/**
 * # Safety
 * `log` must come from this library and not be used afterwards. NULL is a no-op.
 */
void fp_log_free(struct FpObservationLog *log);

/**
 * # Safety
 * `log` must be a live handle, `pet` a NUL-terminated string and `out` valid.
 */
enum FpStatus fp_infer_model(const struct FpObservationLog *log,
                             const char *pet,
                             double f,
                             double alpha,
                             struct FpMaskModel **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FpStatus fp_model_load(const char *path, struct FpMaskModel **out);

/**
 * # Safety
 * `m` must be a live handle and `path` a NUL-terminated string.
 */
enum FpStatus fp_model_save(const struct FpMaskModel *m, const char *path);

/**
 * The bundled handcrafted Tor Browser model.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FpStatus fp_model_tor_handcrafted(struct FpMaskModel **out);

/**
 * Number of attributes with a masked verdict, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live model handle.
 */
size_t fp_model_masked_count(const struct FpMaskModel *m);

/**
 * # Safety
 * `m` must come from this library and not be used afterwards. NULL is a no-op.
 */
void fp_model_free(struct FpMaskModel *m);

/**
 * # Safety
 * `d` and `m` must be live handles and `out` a valid pointer.
 */
enum FpStatus fp_evaluate_pet(const struct FpDataset *d,
                              const struct FpMaskModel *m,
                              enum FpPolicy p,
                              struct FpHybridReport *out);

/**
 * # Safety
 * `d` and `m` must be live handles and `out` a valid pointer.
 */
enum FpStatus fp_popularity_evaluate(const struct FpDataset *d,
                                     const struct FpMaskModel *m,
                                     enum FpPolicy p,
                                     size_t users,
                                     size_t samples,
                                     uint64_t seed,
                                     struct FpEstimate *out);

/**
 * The Tor Browser default strategy.
 */
struct FpSpoofStrategy fp_strategy_tor_default(void);

/**
 * # Safety
 * `s`, `out_w` and `out_h` must be valid pointers.
 */
enum FpStatus fp_spoof(const struct FpSpoofStrategy *s,
                       uint32_t w,
                       uint32_t h,
                       uint32_t *out_w,
                       uint32_t *out_h);

/**
 * # Safety
 * `s` and `out` must be valid pointers.
 */
enum FpStatus fp_strategy_sets(const struct FpSpoofStrategy *s, uint64_t *out);

/**
 * # Safety
 * `d` and `m` must be live handles; `s` and `out` valid pointers.
 */
enum FpStatus fp_score_strategy(const struct FpDataset *d,
                                const struct FpMaskModel *m,
                                const struct FpSpoofStrategy *s,
                                struct FpStrategyScore *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPEVAL_H */
