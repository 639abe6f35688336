#ifndef SENTIKIT_H
#define SENTIKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_ARGUMENT = 1,
  SK_STATUS_INVALID_UTF8 = 2,
  SK_STATUS_CONFIG = 3,
  SK_STATUS_DATA = 4,
  SK_STATUS_MODEL_FORMAT = 5,
  SK_STATUS_IO = 6,
  SK_STATUS_NUMERIC = 7,
  SK_STATUS_BUFFER_TOO_SMALL = 8,
  SK_STATUS_PANIC = 9,
} SkStatus;

typedef struct SkEmbeddings SkEmbeddings;

typedef struct SkModel SkModel;

typedef struct SkPreprocessor SkPreprocessor;

/**
 * Support-weighted summary scores.
 */
typedef struct SkMetrics {
  double accuracy;
  double precision;
  double recall;
  double f1;
} SkMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or NULL. The
 * pointer stays valid until the next call on the same thread.
 */
const char *sk_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sk_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void sk_string_free(char *s);

/**
 * Builds a preprocessor with every step enabled. Each resource path may be
 * NULL, in which case that resource is empty (no dictionary disables
 * spelling correction).
 *
 * # Safety
 * Non-NULL paths must be NUL-terminated strings; `out` must be writable.
 */
enum SkStatus sk_preprocessor_new(const char *stopwords,
                                  const char *emoji_map,
                                  const char *stem_rules,
                                  const char *dictionary,
                                  struct SkPreprocessor **out);

/**
 * # Safety
 * `p` must be NULL or a live preprocessor from [`sk_preprocessor_new`].
 */
void sk_preprocessor_free(struct SkPreprocessor *p);

/**
 * Cleans and tokenizes `input`; `*out` receives the tokens joined by single
 * spaces (empty for a document with no tokens), freed with
 * [`sk_string_free`].
 *
 * # Safety
 * `p` must be a live preprocessor, `input` a NUL-terminated string and
 * `out` writable.
 */
enum SkStatus sk_preprocess(const struct SkPreprocessor *p, const char *input, char **out);

/**
 * Loads a word2vec-format text embedding table.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum SkStatus sk_embeddings_load(const char *path, struct SkEmbeddings **out);

/**
 * Dimension of every vector in the table.
 *
 * # Safety
 * `e` must be a live table from [`sk_embeddings_load`].
 */
size_t sk_embeddings_dim(const struct SkEmbeddings *e);

/**
 * # Safety
 * `e` must be NULL or a live table from [`sk_embeddings_load`].
 */
void sk_embeddings_free(struct SkEmbeddings *e);

/**
 * Loads a saved model bundle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum SkStatus sk_model_load(const char *path, struct SkModel **out);

/**
 * # Safety
 * `m` must be NULL or a live model from [`sk_model_load`].
 */
void sk_model_free(struct SkModel *m);

/**
 * Number of classes the model predicts; 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live model.
 */
size_t sk_model_n_classes(const struct SkModel *m);

/**
 * Name of class `index`, owned by the model; NULL when out of range.
 *
 * # Safety
 * `m` must be NULL or a live model.
 */
const char *sk_model_class_name(const struct SkModel *m, size_t index);

/**
 * True if predicting needs an embedding table.
 *
 * # Safety
 * `m` must be NULL or a live model.
 */
bool sk_model_needs_embeddings(const struct SkModel *m);

/**
 * Classifies one raw text. `pre` may be NULL for every step with empty
 * resources; `emb` may be NULL for bag-of-words models. When `probs` is
 * non-NULL it receives `probs_len` class probabilities, and `probs_len`
 * must equal the class count.
 *
 * # Safety
 * Handles must be live or NULL as described, `input` NUL-terminated,
 * `class_out` writable and `probs` valid for `probs_len` writes.
 */
enum SkStatus sk_model_predict(const struct SkModel *m,
                               const struct SkPreprocessor *pre,
                               const struct SkEmbeddings *emb,
                               const char *input,
                               size_t *class_out,
                               double *probs,
                               size_t probs_len);

/**
 * Scores `n` predicted class indices against `n` true ones.
 *
 * # Safety
 * `preds` and `labels` must each be valid for `n` reads; `out` writable.
 */
enum SkStatus sk_metrics(const size_t *preds,
                         const size_t *labels,
                         size_t n,
                         size_t n_classes,
                         struct SkMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENTIKIT_H */
