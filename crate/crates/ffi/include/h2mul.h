#ifndef H2MUL_H
#define H2MUL_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum H2mulStatus {
  H2MUL_STATUS_OK = 0,
  H2MUL_STATUS_NULL_POINTER = 1,
  H2MUL_STATUS_INVALID_ARGUMENT = 2,
  H2MUL_STATUS_DIMENSION_MISMATCH = 3,
  H2MUL_STATUS_TREE_MISMATCH = 4,
  H2MUL_STATUS_FORMAT = 5,
  H2MUL_STATUS_IO = 6,
  H2MUL_STATUS_INTERNAL = 7,
  H2MUL_STATUS_PANIC = 8,
} H2mulStatus;

/**
 * Opaque H²-matrix handle.
 */
typedef struct H2mulMatrix H2mulMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *h2mul_last_error_message(void);

/**
 * Assembles the single-layer Laplace matrix on the sphere mesh with
 * `8 * 4^level` triangles.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum H2mulStatus h2mul_sphere_assemble(size_t level,
                                       size_t leaf_size,
                                       size_t order,
                                       double eta,
                                       struct H2mulMatrix **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle returned by this library that has not been
 * freed.
 */
void h2mul_matrix_free(struct H2mulMatrix *m);

/**
 * Number of rows and columns.
 *
 * # Safety
 * `m` must be a valid handle, `rows` and `cols` valid pointers.
 */
enum H2mulStatus h2mul_matrix_dims(const struct H2mulMatrix *m, size_t *rows, size_t *cols);

/**
 * `y = G x`.
 *
 * # Safety
 * `m` must be a valid handle, `x` and `y` valid for `x_len` and `y_len`
 * doubles and not overlapping.
 */
enum H2mulStatus h2mul_matrix_matvec(const struct H2mulMatrix *m,
                                     const double *x,
                                     size_t x_len,
                                     double *y,
                                     size_t y_len);

/**
 * `y = G^T x`.
 *
 * # Safety
 * Same as `h2mul_matrix_matvec`.
 */
enum H2mulStatus h2mul_matrix_matvec_adjoint(const struct H2mulMatrix *m,
                                             const double *x,
                                             size_t x_len,
                                             double *y,
                                             size_t y_len);

/**
 * Storage of bases, coupling and nearfield matrices in bytes.
 *
 * # Safety
 * `m` must be a valid handle and `bytes` a valid pointer.
 */
enum H2mulStatus h2mul_matrix_memory(const struct H2mulMatrix *m, size_t *bytes);

/**
 * Approximates `X Y` with block-relative accuracy `eps` on the standard
 * block tree of the row tree of `X` and the column tree of `Y`.
 *
 * # Safety
 * `x` and `y` must be valid handles and `out` a valid handle slot.
 */
enum H2mulStatus h2mul_multiply(const struct H2mulMatrix *x,
                                const struct H2mulMatrix *y,
                                double eps,
                                double theta,
                                struct H2mulMatrix **out);

/**
 * Writes the matrix in the binary format.
 *
 * # Safety
 * `m` must be a valid handle and `path` a NUL-terminated string.
 */
enum H2mulStatus h2mul_matrix_save(const struct H2mulMatrix *m, const char *path);

/**
 * Reads a matrix written by `h2mul_matrix_save`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum H2mulStatus h2mul_matrix_load(const char *path, struct H2mulMatrix **out);

/**
 * Lower bound for the spectral norm by `iterations` power iteration steps.
 *
 * # Safety
 * `m` must be a valid handle and `norm` a valid pointer.
 */
enum H2mulStatus h2mul_matrix_norm_estimate(const struct H2mulMatrix *m,
                                            size_t iterations,
                                            double *norm);

/**
 * Power iteration estimate of `||G G - Z||_2 / ||G G||_2`.
 *
 * # Safety
 * `g` and `z` must be valid handles and `error` a valid pointer.
 */
enum H2mulStatus h2mul_square_error(const struct H2mulMatrix *g,
                                    const struct H2mulMatrix *z,
                                    size_t iterations,
                                    uint64_t seed,
                                    double *error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* H2MUL_H */
