#ifndef GRAUERT_H
#define GRAUERT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GtStatus {
  GT_STATUS_OK = 0,
  GT_STATUS_NULL_POINTER = 1,
  GT_STATUS_INVALID_ARGUMENT = 2,
  GT_STATUS_NUMERICAL = 3,
  GT_STATUS_OVERFLOW = 4,
  GT_STATUS_PANIC = 5,
} GtStatus;

/**
 * Space selector for [`GtCohomology`] queries.
 */
typedef enum GtSpace {
  GT_SPACE_UNIT_TANGENT_BUNDLE = 0,
  GT_SPACE_DIVISOR = 1,
  GT_SPACE_COMPACTIFICATION = 2,
} GtSpace;

/**
 * Integral cohomology of `UM`, `D` and `X` for one `n`.
 */
typedef struct GtCohomology GtCohomology;

/**
 * Closed geodesic `[cos(t/2) z + sin(t/2) w]` of `CP^n`.
 */
typedef struct GtFrame GtFrame;

/**
 * Point of `CP^n x CP^n`.
 */
typedef struct GtProductPoint GtProductPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *gt_version(void);

/**
 * Copies the last error message of this thread into `buf` (nul-terminated, truncated to
 * `len`). Returns the full message length without the terminator, `0` if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gt_last_error_message(char *buf, size_t len);

/**
 * Frame from `n + 1` complex entries each of `z` and `w`, orthonormalized.
 *
 * # Safety
 * `z` and `w` must point to `2 (n + 1)` doubles; `out` must be writable.
 */
enum GtStatus gt_frame_new(size_t n, const double *z, const double *w, struct GtFrame **out);

/**
 * Frame `(e_0, e_1)` of `CP^n`, `n >= 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GtStatus gt_frame_standard(size_t n, struct GtFrame **out);

/**
 * # Safety
 * `frame` must be null or a handle from `gt_frame_new`/`gt_frame_standard`, freed once.
 */
void gt_frame_free(struct GtFrame *frame);

/**
 * Point `φ_γ(σ + iτ)` on the leaf of `frame`.
 *
 * # Safety
 * `frame` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_leaf_map(const struct GtFrame *frame,
                          double sigma,
                          double tau,
                          struct GtProductPoint **out);

/**
 * # Safety
 * `z` and `w` must point to `2 (n + 1)` doubles; `out` must be writable.
 */
enum GtStatus gt_product_point_new(size_t n,
                                   const double *z,
                                   const double *w,
                                   struct GtProductPoint **out);

/**
 * # Safety
 * `p` must be null or a live handle, freed once.
 */
void gt_product_point_free(struct GtProductPoint *p);

/**
 * Complex dimension `n`, or `0` for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t gt_product_point_dim(const struct GtProductPoint *p);

/**
 * Unit representatives of both factors; `len` is the number of complex entries (`n + 1`).
 *
 * # Safety
 * `p` must be a live handle; `z_out`, `w_out` must hold `2 len` doubles.
 */
enum GtStatus gt_product_point_coords(const struct GtProductPoint *p,
                                      double *z_out,
                                      double *w_out,
                                      size_t len);

/**
 * Exhaustion `𝒩`; `+∞` on the divisor.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_exhaustion(const struct GtProductPoint *p, double *out);

/**
 * Length `u0` of the represented tangent vector; `+∞` on the divisor.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_u0(const struct GtProductPoint *p, double *out);

/**
 * Kähler potential `log(2𝒩)`; `+∞` on the divisor.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_kahler_potential(const struct GtProductPoint *p, double *out);

/**
 * Image under `[z] x [w] ↦ [w̄] x [z̄]`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_involution(const struct GtProductPoint *p, struct GtProductPoint **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GtStatus gt_cohomology_new(size_t n, struct GtCohomology **out);

/**
 * # Safety
 * `h` must be null or a live handle, freed once.
 */
void gt_cohomology_free(struct GtCohomology *h);

/**
 * Top degree of the table for `space`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_cohomology_dim(const struct GtCohomology *h, enum GtSpace space, size_t *out);

/**
 * Free rank of `H^degree`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_cohomology_rank(const struct GtCohomology *h,
                                 enum GtSpace space,
                                 size_t degree,
                                 size_t *out);

/**
 * Number of torsion factors of `H^degree`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_cohomology_torsion_count(const struct GtCohomology *h,
                                          enum GtSpace space,
                                          size_t degree,
                                          size_t *out);

/**
 * Torsion factor `index` of `H^degree`; `Overflow` if it does not fit in 64 bits.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum GtStatus gt_cohomology_torsion(const struct GtCohomology *h,
                                    enum GtSpace space,
                                    size_t degree,
                                    size_t index,
                                    int64_t *out);

/**
 * Morse index and total vanishing order of the closed geodesic of `frame`.
 *
 * # Safety
 * `frame` must be a live handle; both outputs must be writable.
 */
enum GtStatus gt_morse_index(const struct GtFrame *frame, size_t *index, size_t *vanishing);

/**
 * Tube radius of the constant-curvature block `K`; `+∞` when entire up to `tau_max`.
 *
 * # Safety
 * `radius` must be writable.
 */
enum GtStatus gt_tube_probe_block(double k, double tau_max, double *radius);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAUERT_H */
