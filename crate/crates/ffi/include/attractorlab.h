#ifndef ATTRACTORLAB_H
#define ATTRACTORLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define AL_OK 0

#define AL_ERR_NULL 1

#define AL_ERR_DOMAIN 2

#define AL_ERR_INVARIANT 3

#define AL_ERR_RANGE 4

#define AL_ERR_NUMERIC 5

#define AL_ERR_CONFIG 6

#define AL_ERR_IO 7

#define AL_ERR_UTF8 8

#define AL_ERR_PANIC 9

typedef struct AlManifest AlManifest;

typedef struct AlModel AlModel;

typedef struct AlOrbit AlOrbit;

typedef struct AlTimeline AlTimeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies this thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns its full length.
 */
size_t al_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *al_version(void);

/**
 * Biangle with saddles `(mu_a, lambda_a)` and `(mu_b, lambda_b)`, monodromy `c`.
 */
int32_t al_model_biangle(double mu_a,
                         double lambda_a,
                         double mu_b,
                         double lambda_b,
                         double c,
                         struct AlModel **out_model);

/**
 * Modified Bowen example: saddle-node `(a, b)` and saddle `(mu, lambda, c)`.
 */
int32_t al_model_mbe(double a,
                     double b,
                     double mu,
                     double lambda,
                     double c,
                     struct AlModel **out_model);

/**
 * Separatrix loop with transit constant `k_transit`.
 */
int32_t al_model_loop(double mu,
                      double lambda,
                      double c,
                      double k_transit,
                      struct AlModel **out_model);

void al_model_free(struct AlModel *m);

/**
 * One return-map step: next coordinate and the turn's time (may be
 * infinite for late MBE turns).
 */
int32_t al_poincare_step(const struct AlModel *m, double x, double *next, double *turn_time);

int32_t al_timeline_generate(const struct AlModel *m,
                             double z0,
                             size_t turns,
                             struct AlTimeline **out_tl);

/**
 * Number of recorded turns, 0 for a null handle.
 */
size_t al_timeline_len(const struct AlTimeline *t);

/**
 * `ln T_{k,A}`; stays finite one tower level beyond `T_{k,A}` itself.
 */
int32_t al_timeline_ln_t_a(const struct AlTimeline *t, size_t k, double *value);

void al_timeline_free(struct AlTimeline *t);

/**
 * Orbit of the default cylinder flow from `(theta0, xi0)` down to `xi_end`.
 */
int32_t al_cylinder_orbit(double theta0,
                          double xi0,
                          double xi_end,
                          double tol,
                          struct AlOrbit **out_orbit);

int32_t al_orbit_theta_at(const struct AlOrbit *o, double xi, double *theta);

/**
 * Final strip fractions `(χ_l, χ_r)` with strip half-width `eps`.
 */
int32_t al_orbit_occupancy(const struct AlOrbit *o, double eps, double *chi_l, double *chi_r);

void al_orbit_free(struct AlOrbit *o);

/**
 * Runs the scenario in the TOML text `config` and returns its manifest.
 * A run that stops on a module error still succeeds here; see
 * `al_manifest_passed`.
 */
int32_t al_run_scenario(const char *config, struct AlManifest **out_manifest);

/**
 * 1 if every verdict passed and no error was recorded, 0 otherwise.
 */
int32_t al_manifest_passed(const struct AlManifest *m);

/**
 * Copies the manifest file path into `buf` like `al_last_error`; returns
 * its full length, 0 for a null handle.
 */
size_t al_manifest_path(const struct AlManifest *m, char *buf, size_t len);

void al_manifest_free(struct AlManifest *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATTRACTORLAB_H */
