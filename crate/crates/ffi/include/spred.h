#ifndef SPRED_H
#define SPRED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpredStatus {
  SPRED_STATUS_OK = 0,
  SPRED_STATUS_NULL_POINTER = 1,
  SPRED_STATUS_INVALID_INPUT = 2,
  SPRED_STATUS_NUMERICAL = 3,
  SPRED_STATUS_CONFIG = 4,
  SPRED_STATUS_BUFFER_TOO_SMALL = 5,
  SPRED_STATUS_PANIC = 6,
} SpredStatus;

typedef struct SpredCloud SpredCloud;

typedef struct SpredDiagram SpredDiagram;

typedef struct SpredProjection SpredProjection;

/**
 * Annealing settings. Orders are given as weights of degrees 0 and 1; they
 * are rescaled to sum to one.
 */
typedef struct SpredAnnealConfig {
  size_t k;
  double weight0;
  double weight1;
  double p;
  double q;
  double tau0;
  double tau_end;
  double gamma;
  double sigma;
  size_t steps_per_temp;
  size_t chains;
  uint64_t seed;
} SpredAnnealConfig;

typedef struct SpredSimilarity {
  double eta;
  double mu_quasi_iso;
  double mu_equiv_lower;
  double mu_equiv_upper;
} SpredSimilarity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *spred_last_error(void);

/**
 * # Safety
 * `data` must hold `rows * cols` readable doubles.
 */
enum SpredStatus spred_cloud_new(const double *data,
                                 size_t rows,
                                 size_t cols,
                                 struct SpredCloud **out);

/**
 * # Safety
 * `cloud` must come from this library and not be freed twice; null is ignored.
 */
void spred_cloud_free(struct SpredCloud *cloud);

/**
 * Number of points, or 0 for null.
 *
 * # Safety
 * `cloud` must be a live handle or null.
 */
size_t spred_cloud_len(const struct SpredCloud *cloud);

/**
 * # Safety
 * `cloud` must be a live handle or null.
 */
size_t spred_cloud_dim(const struct SpredCloud *cloud);

/**
 * Copies the points into `out` (row-major, `len` doubles available).
 *
 * # Safety
 * `cloud` must be a live handle and `out` must hold `len` writable doubles.
 */
enum SpredStatus spred_cloud_copy(const struct SpredCloud *cloud, double *out, size_t len);

/**
 * An `n x k` matrix with orthonormal columns.
 *
 * # Safety
 * `data` must hold `n * k` readable doubles.
 */
enum SpredStatus spred_projection_new(const double *data,
                                      size_t n,
                                      size_t k,
                                      struct SpredProjection **out);

/**
 * # Safety
 * `proj` must come from this library and not be freed twice; null is ignored.
 */
void spred_projection_free(struct SpredProjection *proj);

/**
 * # Safety
 * `proj` must be a live handle or null.
 */
size_t spred_projection_ambient_dim(const struct SpredProjection *proj);

/**
 * # Safety
 * `proj` must be a live handle or null.
 */
size_t spred_projection_target_dim(const struct SpredProjection *proj);

/**
 * # Safety
 * `proj` must be a live handle and `out` must hold `len` writable doubles.
 */
enum SpredStatus spred_projection_copy(const struct SpredProjection *proj, double *out, size_t len);

/**
 * The top `k` principal directions.
 *
 * # Safety
 * `cloud` must be a live handle and `out` writable.
 */
enum SpredStatus spred_pca(const struct SpredCloud *cloud, size_t k, struct SpredProjection **out);

/**
 * The library defaults: `k = 2`, order 0, `p = q = 2`, one chain, seed 0.
 */
struct SpredAnnealConfig spred_anneal_config_default(void);

/**
 * Anneals a projection; `best_cost` may be null.
 *
 * # Safety
 * `cloud` and `config` must be valid pointers and `out` writable.
 */
enum SpredStatus spred_anneal(const struct SpredCloud *cloud,
                              const struct SpredAnnealConfig *config,
                              struct SpredProjection **out,
                              double *best_cost);

/**
 * # Safety
 * `cloud` and `proj` must be live handles and `out` writable.
 */
enum SpredStatus spred_project(const struct SpredCloud *cloud,
                               const struct SpredProjection *proj,
                               struct SpredCloud **out);

/**
 * Rips persistence diagram of the given degree (radius scale).
 *
 * # Safety
 * `cloud` must be a live handle and `out` writable.
 */
enum SpredStatus spred_diagram(const struct SpredCloud *cloud,
                               size_t degree,
                               struct SpredDiagram **out);

/**
 * Builds a diagram from `len` pairs; an infinite death marks an essential class.
 *
 * # Safety
 * `births` and `deaths` must each hold `len` readable doubles.
 */
enum SpredStatus spred_diagram_new(size_t degree,
                                   const double *births,
                                   const double *deaths,
                                   size_t len,
                                   struct SpredDiagram **out);

/**
 * # Safety
 * `diagram` must come from this library and not be freed twice; null is ignored.
 */
void spred_diagram_free(struct SpredDiagram *diagram);

/**
 * Number of pairs, or 0 for null.
 *
 * # Safety
 * `diagram` must be a live handle or null.
 */
size_t spred_diagram_len(const struct SpredDiagram *diagram);

/**
 * Copies births and deaths (infinite for essential classes).
 *
 * # Safety
 * `diagram` must be a live handle; `births` and `deaths` must each hold
 * `len` writable doubles.
 */
enum SpredStatus spred_diagram_copy(const struct SpredDiagram *diagram,
                                    double *births,
                                    double *deaths,
                                    size_t len);

/**
 * `p`-Wasserstein distance with ground `q`-norm; infinite `p` gives the
 * bottleneck distance.
 *
 * # Safety
 * Both diagrams must be live handles and `out` writable.
 */
enum SpredStatus spred_wasserstein(const struct SpredDiagram *a,
                                   const struct SpredDiagram *b,
                                   double p,
                                   double q,
                                   double *out);

/**
 * Similarity measures of the canonical embedding. A negative or NaN `eta`
 * selects the automatic value.
 *
 * # Safety
 * `cloud` and `proj` must be live handles and `out` writable.
 */
enum SpredStatus spred_similarity(const struct SpredCloud *cloud,
                                  const struct SpredProjection *proj,
                                  double eta,
                                  size_t l,
                                  size_t budget,
                                  struct SpredSimilarity *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPRED_H */
