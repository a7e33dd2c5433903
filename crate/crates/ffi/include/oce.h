#ifndef OCE_H
#define OCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OceLearner {
  OCE_LEARNER_NAIVE_BAYES = 0,
  OCE_LEARNER_LDA = 1,
  OCE_LEARNER_QDA = 2,
} OceLearner;

typedef enum OceStatus {
  OCE_STATUS_OK = 0,
  OCE_STATUS_NULL_POINTER = 1,
  OCE_STATUS_INVALID_ARGUMENT = 2,
  OCE_STATUS_DIMENSION_MISMATCH = 3,
  // Data problems such as a dataset without one of the classes.
  OCE_STATUS_DATA = 4,
  OCE_STATUS_PANIC = 5,
} OceStatus;

// Opaque trained batch ensemble.
typedef struct OceBatch OceBatch;

// Opaque online ensemble.
typedef struct OceOnline OceOnline;

// Ensemble parameters; start from [`oce_config_default`].
typedef struct OceConfig {
  size_t members;
  enum OceLearner learner;
  double c_pos;
  double c_neg;
  double c_rate;
  size_t k_smote;
  double beta;
} OceConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Defaults: 10 members, naive Bayes, unit costs and rate, k = 5, no forgetting.
struct OceConfig oce_config_default(void);

// Library version as a static NUL-terminated string.
const char *oce_version(void);

// Message of the last failed call on this thread, or null. Valid until the next call.
const char *oce_last_error_message(void);

// Creates an online ensemble. `algorithm` is an id such as `"uob"` or `"adac2"`;
// a null `cfg` means the defaults.
//
// # Safety
// `algorithm` must be a NUL-terminated string, `cfg` null or valid, `out` writable.
enum OceStatus oce_online_new(const char *algorithm_id,
                              const struct OceConfig *cfg,
                              size_t dim,
                              uint64_t seed,
                              struct OceOnline **out);

// Learns one instance with label 0 (negative) or 1 (positive).
//
// # Safety
// `handle` must come from [`oce_online_new`]; `x` must hold `dim` doubles.
enum OceStatus oce_online_update(struct OceOnline *handle, const double *x, size_t dim, uint8_t y);

// Writes the ensemble's positive-vote score in `[0, 1]`.
//
// # Safety
// `handle` must be live; `x` must hold `dim` doubles; `out` must be writable.
enum OceStatus oce_online_score(const struct OceOnline *handle,
                                const double *x,
                                size_t dim,
                                double *out);

// Writes the predicted label (0 or 1).
//
// # Safety
// As for [`oce_online_score`].
enum OceStatus oce_online_predict(const struct OceOnline *handle,
                                  const double *x,
                                  size_t dim,
                                  uint8_t *out);

// # Safety
// `handle` must be null or come from [`oce_online_new`], and not be used afterwards.
void oce_online_free(struct OceOnline *handle);

// Trains a batch ensemble on `n` row-major instances of `dim` features.
//
// # Safety
// `rows` must hold `n * dim` doubles, `labels` `n` bytes; `out` must be writable.
enum OceStatus oce_batch_train(const char *algorithm_id,
                               const struct OceConfig *cfg,
                               const double *rows,
                               const uint8_t *labels,
                               size_t n,
                               size_t dim,
                               uint64_t seed,
                               struct OceBatch **out);

// # Safety
// `handle` must come from [`oce_batch_train`]; `x` must hold `dim` doubles.
enum OceStatus oce_batch_score(const struct OceBatch *handle,
                               const double *x,
                               size_t dim,
                               double *out);

// # Safety
// As for [`oce_batch_score`].
enum OceStatus oce_batch_predict(const struct OceBatch *handle,
                                 const double *x,
                                 size_t dim,
                                 uint8_t *out);

// # Safety
// `handle` must be null or come from [`oce_batch_train`], and not be used afterwards.
void oce_batch_free(struct OceBatch *handle);

// Rank-based AUC of `n` scores against 0/1 labels.
//
// # Safety
// `scores` and `labels` must hold `n` elements; `out` must be writable.
enum OceStatus oce_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OCE_H */
