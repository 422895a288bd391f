#ifndef KFRAME_H
#define KFRAME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KframeStatus {
  KFRAME_STATUS_OK = 0,
  KFRAME_STATUS_NULL_POINTER = 1,
  KFRAME_STATUS_INVALID_INPUT = 2,
  KFRAME_STATUS_SHAPE_MISMATCH = 3,
  KFRAME_STATUS_SINGULAR = 4,
  KFRAME_STATUS_NOT_IN_GROUP = 5,
  KFRAME_STATUS_NUMERICAL = 6,
  KFRAME_STATUS_PANIC = 7,
} KframeStatus;

typedef enum KframeClassKind {
  KFRAME_CLASS_KIND_UNIQUE = 0,
  KFRAME_CLASS_KIND_ARBITRARY = 1,
  KFRAME_CLASS_KIND_INCONSISTENT = 2,
  KFRAME_CLASS_KIND_RESIDUAL = 3,
} KframeClassKind;

typedef enum KframeSpeedKind {
  KFRAME_SPEED_KIND_FINITE = 0,
  KFRAME_SPEED_KIND_INFINITE = 1,
  KFRAME_SPEED_KIND_ZERO = 2,
  KFRAME_SPEED_KIND_UNDEFINED = 3,
} KframeSpeedKind;

/**
 * A fiber group specification.
 */
typedef struct KframeGroup KframeGroup;

/**
 * A list of 4x4 transition matrices.
 */
typedef struct KframeMatrixSet KframeMatrixSet;

/**
 * Result of `kframe_classify`. `k` is meaningful for `Unique` only, and
 * is ignored when `k_is_omega` is set.
 */
typedef struct KframeClassification {
  enum KframeClassKind kind;
  double k;
  bool k_is_omega;
} KframeClassification;

typedef struct KframeSpeed {
  enum KframeSpeedKind kind;
  double c;
} KframeSpeed;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *kframe_last_error_message(void);

/**
 * Static, NUL-terminated crate version.
 */
const char *kframe_version(void);

struct KframeMatrixSet *kframe_matrix_set_new(void);

/**
 * # Safety
 * `set` must come from `kframe_matrix_set_new` and not be used afterwards.
 */
void kframe_matrix_set_free(struct KframeMatrixSet *set);

/**
 * Appends a 4x4 matrix given as 16 row-major doubles.
 *
 * # Safety
 * `set` must be a live handle and `data` must point to 16 doubles.
 */
enum KframeStatus kframe_matrix_set_push(struct KframeMatrixSet *set, const double *data);

/**
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum KframeStatus kframe_matrix_set_len(const struct KframeMatrixSet *set, size_t *out);

/**
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum KframeStatus kframe_classify(const struct KframeMatrixSet *set,
                                  double tol,
                                  struct KframeClassification *out);

/**
 * Membership of a 4x4 matrix in `O^k`.
 *
 * # Safety
 * `data` must point to 16 doubles and `out` be writable.
 */
enum KframeStatus kframe_in_group(const double *data,
                                  double k,
                                  bool k_is_omega,
                                  double tol,
                                  bool pto,
                                  bool *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum KframeStatus kframe_speed_of_interactions(double k, bool k_is_omega, struct KframeSpeed *out);

/**
 * The group `O^k` on 4x4 matrices.
 *
 * # Safety
 * `out` must be writable; on success it receives a new handle.
 */
enum KframeStatus kframe_group_ok(double k, bool k_is_omega, struct KframeGroup **out);

/**
 * A group from its JSON description, e.g. `{"ok": -1.0}` or `{"generators": [...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum KframeStatus kframe_group_from_json(const char *json, struct KframeGroup **out);

/**
 * # Safety
 * `group` must come from a `kframe_group_*` constructor and not be used afterwards.
 */
void kframe_group_free(struct KframeGroup *group);

/**
 * Size of the matrices in the group.
 *
 * # Safety
 * `group` must be a live handle and `out` writable.
 */
enum KframeStatus kframe_group_matrix_dim(const struct KframeGroup *group, size_t *out);

/**
 * # Safety
 * `group` must be a live handle and `out` writable.
 */
enum KframeStatus kframe_group_algebra_dimension(const struct KframeGroup *group, size_t *out);

/**
 * # Safety
 * `group` must be a live handle, `data` must point to `dim * dim`
 * doubles with `dim` the group's matrix size, and `out` be writable.
 */
enum KframeStatus kframe_group_contains(const struct KframeGroup *group,
                                        const double *data,
                                        double tol,
                                        bool *out);

/**
 * Writes a seeded element of the group's identity component into `out`
 * (`dim * dim` doubles, row-major).
 *
 * # Safety
 * `group` must be a live handle and `out` must have room for `dim * dim` doubles.
 */
enum KframeStatus kframe_group_random_element(const struct KframeGroup *group,
                                              uint64_t seed,
                                              double scale,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KFRAME_H */
