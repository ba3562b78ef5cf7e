#ifndef SOUNDQ_H
#define SOUNDQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define SQ_CLASS_ENGINE_BOOM 0

#define SQ_CLASS_WIND_WHISTLE 1

#define SQ_CLASS_ROAD_NOISE 2

enum SqStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SQ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SQ_STATUS_NULL_POINTER = 1,
  SQ_STATUS_PARAMETER = 2,
  SQ_STATUS_IO = 3,
  SQ_STATUS_MISMATCH = 4,
  /**
   * Well-formed input on which a metric is undefined (e.g. silence).
   */
  SQ_STATUS_DEGENERATE = 5,
  SQ_STATUS_FORMAT = 6,
  SQ_STATUS_TRAINING = 7,
  SQ_STATUS_PANIC = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SqStatus SqStatus;
#else
typedef int32_t SqStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Labeled feature dataset with its frozen split.
 */
typedef struct SqDataset SqDataset;

/**
 * Trained classifier.
 */
typedef struct SqModel SqModel;

/**
 * Mono audio buffer.
 */
typedef struct SqSignal SqSignal;

/**
 * The feature vector `[N, S, R, F, T, PA]`.
 */
typedef struct SqFeatures {
  double loudness;
  double sharpness;
  double roughness;
  double fluctuation;
  double tonality;
  double annoyance;
} SqFeatures;

typedef struct SqEvalReport {
  double accuracy;
  /**
   * Row-major, rows are true classes.
   */
  uint32_t confusion[3][3];
  double spearman_pa;
  /**
   * `false` when the rank correlation is undefined; `spearman_pa` is then 0.
   */
  bool spearman_defined;
} SqEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sq_version(void);

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sq_last_error_message(void);

/**
 * Copies `len` samples into a new signal.
 *
 * # Safety
 * `samples` must point to `len` readable doubles; `out` must be writable.
 */
SqStatus sq_signal_from_samples(const double *samples,
                                size_t len,
                                uint32_t sample_rate,
                                struct SqSignal **out);

/**
 * Reads a mono or multichannel (downmixed) WAV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
SqStatus sq_signal_read_wav(const char *path, struct SqSignal **out);

/**
 * Writes a 32-bit float mono WAV file.
 *
 * # Safety
 * `signal` must be a live handle and `path` a NUL-terminated string.
 */
SqStatus sq_signal_write_wav(const struct SqSignal *signal, const char *path);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `signal` must be null or a live handle.
 */
size_t sq_signal_len(const struct SqSignal *signal);

/**
 * Sample rate in Hz; 0 for a null handle.
 *
 * # Safety
 * `signal` must be null or a live handle.
 */
uint32_t sq_signal_sample_rate(const struct SqSignal *signal);

/**
 * Copies up to `capacity` samples into `buffer` and stores the number
 * copied in `written`.
 *
 * # Safety
 * `buffer` must hold `capacity` writable doubles.
 */
SqStatus sq_signal_copy_samples(const struct SqSignal *signal,
                                double *buffer,
                                size_t capacity,
                                size_t *written);

/**
 * # Safety
 * `signal` must be null or a handle not yet freed.
 */
void sq_signal_free(struct SqSignal *signal);

/**
 * Synthesizes item `index` of a seeded stimulus family
 * (`SQ_CLASS_*` constants).
 *
 * # Safety
 * `out` must be writable.
 */
SqStatus sq_synth(int32_t class_, uint64_t base_seed, uint64_t index, struct SqSignal **out);

/**
 * Computes the six-feature vector with default analysis settings.
 *
 * # Safety
 * `signal` must be a live handle; `out` must be writable.
 */
SqStatus sq_analyze(const struct SqSignal *signal, struct SqFeatures *out);

/**
 * Integrated program loudness in LUFS. `defined` is false (and `lufs` 0)
 * when every block falls below the absolute gate.
 *
 * # Safety
 * `signal` must be a live handle; `lufs` and `defined` must be writable.
 */
SqStatus sq_lufs_integrated(const struct SqSignal *signal, double *lufs, bool *defined);

/**
 * Psychoacoustic annoyance from loudness, sharpness, roughness and
 * fluctuation relative to the given thresholds.
 *
 * # Safety
 * `out` must be writable.
 */
SqStatus sq_annoyance(double n,
                      double s,
                      double r,
                      double f,
                      double s0,
                      double r0,
                      double f0,
                      double *out);

/**
 * Spearman rank correlation. `defined` is false when either input is
 * constant.
 *
 * # Safety
 * `x` and `y` must each point to `len` readable doubles.
 */
SqStatus sq_spearman(const double *x, const double *y, size_t len, double *out, bool *defined);

/**
 * Builds the labeled dataset (70/30 stratified split, default analysis).
 *
 * # Safety
 * `out` must be writable.
 */
SqStatus sq_dataset_build(size_t n_per_class, uint64_t base_seed, struct SqDataset **out);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t sq_dataset_len(const struct SqDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void sq_dataset_free(struct SqDataset *dataset);

/**
 * Trains a random forest (two features per split, bootstrap) on the
 * dataset's train split.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
SqStatus sq_model_train_forest(const struct SqDataset *dataset,
                               size_t n_trees,
                               uint64_t seed,
                               struct SqModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void sq_model_free(struct SqModel *model);

/**
 * Scores `model` on the test split of the dataset it was trained on.
 *
 * # Safety
 * `model` and `dataset` must be live handles; `out` must be writable.
 */
SqStatus sq_evaluate(const struct SqModel *model,
                     const struct SqDataset *dataset,
                     struct SqEvalReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOUNDQ_H */
