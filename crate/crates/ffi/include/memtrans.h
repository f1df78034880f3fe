#ifndef MEMTRANS_H
#define MEMTRANS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MtStatus {
  MT_STATUS_OK = 0,
  MT_STATUS_NULL_POINTER = 1,
  MT_STATUS_INVALID_UTF8 = 2,
  /*
   The scenario could not be parsed or violates an assumption.
   */
  MT_STATUS_CONFIG = 3,
  /*
   The time integration failed; the partial run is kept.
   */
  MT_STATUS_SOLVER = 4,
  /*
   Argument outside the domain of a statistics function.
   */
  MT_STATUS_DOMAIN = 5,
  /*
   Output buffer length does not match the number of cells.
   */
  MT_STATUS_BUFFER_SIZE = 6,
  MT_STATUS_UNKNOWN_FIELD = 7,
  MT_STATUS_PANIC = 8,
} MtStatus;

/*
 Opaque simulation handle.
 */
typedef struct MtSimulation MtSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *mt_version(void);

/*
 Message of the last failed call on this thread, or NULL. The pointer is
 valid until the next call into the library from the same thread.
 */
const char *mt_last_error(void);

/*
 Normalized Fermi–Dirac integral `F_j(z)` for `j > -1` or `j = -1`.

 # Safety
 `out` must be NULL or valid for writing one double.
 */
enum MtStatus mt_fermi_dirac(double j, double z, double *out);

/*
 Inverse of `F_{1/2}` on `(0, ∞)`.

 # Safety
 `out` must be NULL or valid for writing one double.
 */
enum MtStatus mt_inverse_fd_half(double z, double *out);

/*
 `g'(z) = 1 / F_{-1/2}(g(z))`.

 # Safety
 `out` must be NULL or valid for writing one double.
 */
enum MtStatus mt_g_prime(double z, double *out);

/*
 Blakemore chemical potential `h(z) = log(z / (1 - z))` on `(0, 1)`.

 # Safety
 `out` must be NULL or valid for writing one double.
 */
enum MtStatus mt_blakemore_h(double z, double *out);

/*
 Parses and resolves a scenario given as TOML text. Relative data file
 paths are resolved against `base_dir`, or the working directory when it
 is NULL. On success `*out` owns a new handle.

 # Safety
 `toml` must be a NUL-terminated string, `base_dir` NULL or
 NUL-terminated, and `out` valid for writing one pointer.
 */
enum MtStatus mt_simulation_from_toml(const char *toml,
                                      const char *base_dir,
                                      struct MtSimulation **out);

/*
 Releases a handle. NULL is ignored.

 # Safety
 `sim` must be NULL or a handle from [`mt_simulation_from_toml`] that has
 not been freed.
 */
void mt_simulation_free(struct MtSimulation *sim);

/*
 Runs the scenario to its final time. On `MT_STATUS_SOLVER` the state
 reached before the failure is kept and can still be queried.

 # Safety
 `sim` must be a live handle not used concurrently from another thread.
 */
enum MtStatus mt_simulation_run(struct MtSimulation *sim);

/*
 # Safety
 `sim` must be a live handle and `out` valid for writing one `size_t`.
 */
enum MtStatus mt_simulation_num_cells(const struct MtSimulation *sim, size_t *out);

/*
 Time of the current state.

 # Safety
 `sim` must be a live handle and `out` valid for writing one double.
 */
enum MtStatus mt_simulation_time(const struct MtSimulation *sim, double *out);

/*
 Accepted time steps so far (0 before the run).

 # Safety
 `sim` must be a live handle and `out` valid for writing one `size_t`.
 */
enum MtStatus mt_simulation_steps(const struct MtSimulation *sim, size_t *out);

/*
 Copies a cell field of the current state into `buf`. `name` is one of
 `n`, `p`, `D`, `V`, `phi_n`, `phi_p`, `phi_D`, `x`, `y`; `len` must equal
 the number of cells.

 # Safety
 `name` must be NUL-terminated and `buf` valid for writing `len` doubles.
 */
enum MtStatus mt_simulation_get_field(const struct MtSimulation *sim,
                                      const char *name,
                                      double *buf,
                                      size_t len);

/*
 Free energy of the current state, relative to the boundary data in
 force at that time.

 # Safety
 `sim` must be a live handle and `out` valid for writing one double.
 */
enum MtStatus mt_simulation_energy(const struct MtSimulation *sim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMTRANS_H */
