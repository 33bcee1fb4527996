#ifndef TIERWAVE_H
#define TIERWAVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TwStatus {
  TW_STATUS_OK = 0,
  TW_STATUS_NULL_POINTER = 1,
  TW_STATUS_INVALID_PARAMETER = 2,
  TW_STATUS_REQUIRES_ALPHA_FOUR = 3,
  TW_STATUS_DEGENERATE = 4,
  TW_STATUS_INFEASIBLE = 5,
  TW_STATUS_NUMERICAL = 6,
  TW_STATUS_CONFIG = 7,
  TW_STATUS_IO = 8,
  TW_STATUS_UNKNOWN_NAME = 9,
  TW_STATUS_PANIC = 10,
} TwStatus;

typedef enum TwScenario {
  TW_SCENARIO_HIGH_ATTENUATION = 0,
  TW_SCENARIO_LOW_ATTENUATION = 1,
} TwScenario;

/**
 * Opaque femtocell tier model.
 */
typedef struct TwFemtoEnv TwFemtoEnv;

/**
 * Opaque macrocell SIR model.
 */
typedef struct TwMacroEnv TwMacroEnv;

/**
 * Opaque system parameter set.
 */
typedef struct TwParams TwParams;

typedef struct TwFalohaOptimum {
  double rho_f;
  double throughput;
  double ase;
  bool unimodal;
} TwFalohaOptimum;

typedef struct TwAllocation {
  double rho;
  double rho_f;
  double t_c;
  double t_f;
  double u_c;
  double u_f;
  double eta;
  double ase;
  double t_cu;
  double t_fu;
  bool binding;
} TwAllocation;

typedef struct TwRequiredSpectrum {
  double total_hz;
  double femto_form_hz;
  double subchannels;
  bool targets_consistent;
  bool forms_agree;
} TwRequiredSpectrum;

typedef struct TwPfResult {
  double throughput_pf;
  double throughput_rr;
  double stderr_pf;
  double stderr_rr;
} TwPfResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *tw_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tw_version(void);

enum TwStatus tw_params_reference(enum TwScenario scenario, struct TwParams **out);

/**
 * # Safety
 * `params` must be null or a handle from `tw_params_*` not yet freed.
 */
enum TwStatus tw_params_clone(const struct TwParams *params, struct TwParams **out);

/**
 * Sets one parameter by its table name (`R_c`, `N_f`, `P_f_dB`, ...). The
 * handle is left unchanged if the result fails validation.
 *
 * # Safety
 * `params` must be a live handle and `name` a NUL-terminated string.
 */
enum TwStatus tw_params_set(struct TwParams *params, const char *name, double value);

/**
 * Reads one parameter by its table name.
 *
 * # Safety
 * `params` must be a live handle, `name` a NUL-terminated string.
 */
enum TwStatus tw_params_get(const struct TwParams *params, const char *name, double *out);

/**
 * # Safety
 * `params` must be null or a live handle; it is invalid afterwards.
 */
void tw_params_free(struct TwParams *params);

/**
 * `C(a, b)`.
 */
enum TwStatus tw_c_function(double a, double b, double *out);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum TwStatus tw_macro_env_new(const struct TwParams *params,
                               size_t annuli,
                               struct TwMacroEnv **out);

/**
 * Cell-averaged SIR CDF at linear threshold `gamma`.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_macro_sir_cdf(const struct TwMacroEnv *env, double gamma, double *out);

/**
 * Round-robin subchannel throughput `T_c`, b/s/Hz.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_macro_throughput_rr(const struct TwMacroEnv *env, double *out);

/**
 * # Safety
 * `env` must be null or a live handle; it is invalid afterwards.
 */
void tw_macro_env_free(struct TwMacroEnv *env);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum TwStatus tw_femto_env_new(const struct TwParams *params,
                               double rho_f,
                               struct TwFemtoEnv **out);

/**
 * Femtocell subchannel throughput `T_f`, b/s/Hz.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_femto_throughput(const struct TwFemtoEnv *env, double *out);

/**
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_femto_sir_cdf(const struct TwFemtoEnv *env, double gamma, double *out);

/**
 * Lower bound on the interference tail `Pr(I > y)`.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_femto_tail_lb(const struct TwFemtoEnv *env, double y, double *out);

/**
 * Exact interference tail; fails with `RequiresAlphaFour` unless `alpha_f = 4`.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_femto_tail_exact(const struct TwFemtoEnv *env, double y, double *out);

/**
 * # Safety
 * `env` must be a live handle.
 */
enum TwStatus tw_femto_optimize(const struct TwFemtoEnv *env, struct TwFalohaOptimum *out);

/**
 * # Safety
 * `env` must be null or a live handle; it is invalid afterwards.
 */
void tw_femto_env_free(struct TwFemtoEnv *env);

/**
 * Optimal spectrum split for macrocell throughput `t_c` and QoS `eta`, with
 * the femtocell tier at its best access fraction.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum TwStatus tw_plan(const struct TwParams *params,
                      double t_c,
                      double eta,
                      struct TwAllocation *out);

/**
 * # Safety
 * `alloc` must point to a valid `TwAllocation`.
 */
enum TwStatus tw_required_spectrum(const struct TwAllocation *alloc,
                                   double d_c,
                                   double d_f,
                                   double bandwidth,
                                   struct TwRequiredSpectrum *out);

/**
 * Proportional-fair and round-robin throughput over `drops` user drops of
 * `trials` scheduling intervals each.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum TwStatus tw_simulate_pf(const struct TwParams *params,
                             size_t users,
                             size_t drops,
                             size_t trials,
                             uint64_t seed,
                             struct TwPfResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TIERWAVE_H */
