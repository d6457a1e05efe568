#ifndef WAVEGAUGE_H
#define WAVEGAUGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Wave construction method.
typedef enum WgMethod {
  WG_METHOD_AUTO = 0,
  WG_METHOD_CLOSED_FORM = 1,
  WG_METHOD_SHOOTING = 2,
} WgMethod;

// Result codes.
typedef enum WgStatus {
  WG_STATUS_OK = 0,
  WG_STATUS_NULL_POINTER = 1,
  WG_STATUS_INVALID_ARGUMENT = 2,
  WG_STATUS_NUMERICAL = 3,
  WG_STATUS_BUFFER_TOO_SMALL = 4,
  WG_STATUS_PANIC = 5,
} WgStatus;

// Opaque reaction term.
typedef struct WgReaction WgReaction;

// Opaque travelling wave on a truncated grid.
typedef struct WgWave WgWave;

// Stability constants of a wave.
typedef struct WgConstants {
  double c;
  double kappa;
  double gamma_minus;
  double gamma_plus;
  double z;
  double z_half;
  double c_prop;
  double q1;
  double q2;
  double kappa_star;
  double big_c_star;
  double c_star;
} WgConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next call into the library from the same thread.
const char *wg_last_error(void);

// Library version as a static NUL-terminated string.
const char *wg_version(void);

// Nagumo reaction `v(1-v)(v-a)`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle pointer.
enum WgStatus wg_reaction_nagumo(double a, struct WgReaction **out);

// Polynomial reaction from ascending coefficients `coeffs[0] + coeffs[1] v + ...`.
//
// # Safety
// `coeffs` must point to `len` readable doubles and `out` must be writable.
enum WgStatus wg_reaction_polynomial(const double *coeffs, size_t len, struct WgReaction **out);

// Releases a reaction handle. NULL is ignored.
//
// # Safety
// `r` must come from a `wg_reaction_*` constructor and not be used afterwards.
void wg_reaction_free(struct WgReaction *r);

// Evaluates `f(v)` and `f'(v)`. Either output may be NULL.
//
// # Safety
// `r` must be a live handle; non-null outputs must be writable.
enum WgStatus wg_reaction_eval(const struct WgReaction *r, double v, double *f, double *df);

// Checks the bistable structural assumptions on `samples` points; writes 1 to
// `passed` if all hold and 0 otherwise. The first failing check is reported
// through [`wg_last_error`].
//
// # Safety
// `r` must be a live handle and `passed` writable.
enum WgStatus wg_reaction_validate(const struct WgReaction *r, size_t samples, int *passed);

// Builds the wave of `v_t = nu v_xx + b f(v)` on `[-l_dom, l_dom]` with `n` nodes.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum WgStatus wg_wave_build(const struct WgReaction *r,
                            double nu,
                            double b,
                            double l_dom,
                            size_t n,
                            enum WgMethod method,
                            struct WgWave **out);

// Releases a wave handle. NULL is ignored.
//
// # Safety
// `w` must come from [`wg_wave_build`] and not be used afterwards.
void wg_wave_free(struct WgWave *w);

// Wave speed.
//
// # Safety
// `w` must be a live handle and `c` writable.
enum WgStatus wg_wave_speed(const struct WgWave *w, double *c);

// Number of grid nodes, or 0 for NULL.
//
// # Safety
// `w` must be NULL or a live handle.
size_t wg_wave_len(const struct WgWave *w);

// Copies nodes, `v` and `v_x` into caller buffers of length `len`. Any of
// the three buffers may be NULL.
//
// # Safety
// `w` must be a live handle; non-null buffers must hold `len` doubles.
enum WgStatus wg_wave_copy_profile(const struct WgWave *w,
                                   double *x,
                                   double *v,
                                   double *vx,
                                   size_t len);

// Computes the stability constants of the wave.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum WgStatus wg_wave_constants(const struct WgWave *w, struct WgConstants *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEGAUGE_H */
