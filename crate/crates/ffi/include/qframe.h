#ifndef QFRAME_H
#define QFRAME_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum QfStatus {
  QF_STATUS_OK = 0,
  QF_STATUS_NULL_POINTER = 1,
  QF_STATUS_INVALID_UTF8 = 2,
  QF_STATUS_CONFIG = 3,
  QF_STATUS_INTEGRATOR_ABORT = 4,
  QF_STATUS_IO = 5,
  QF_STATUS_NUMERICAL = 6,
  QF_STATUS_OUT_OF_RANGE = 7,
  QF_STATUS_BUFFER_TOO_SMALL = 8,
  QF_STATUS_PANIC = 9,
} QfStatus;

// Scenario configuration handle.
typedef struct QfScenario QfScenario;

// Integrated trajectory handle.
typedef struct QfTrajectory QfTrajectory;

// One trajectory row. `transmon_occupation` is NaN for two-level devices.
typedef struct QfSample {
  double t;
  double kappa_t;
  double alpha_re;
  double alpha_im;
  double photon_number;
  double real_quadrature;
  double abs_c_u;
  double transmon_occupation;
  double trace_error;
} QfSample;

// Dispersive quantities of a labeled spectrum. `n_crit` is +inf when the
// coupling vanishes; `e_ef` and `anharmonicity` are NaN for two levels.
typedef struct QfDispersive {
  double omega_c_ren;
  double chi;
  double omega_c_ren_pert;
  double chi_pert;
  double n_crit;
  double e_ge;
  double e_ef;
  double anharmonicity;
} QfDispersive;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after success.
// Valid until the next `qf_*` call on the same thread.
const char *qf_last_error(void);

// Library name and version, static storage.
const char *qf_version(void);

// Parses a TOML scenario.
//
// # Safety
// `toml` must be a nul-terminated string and `out` a writable pointer.
enum QfStatus qf_scenario_from_toml(const char *toml, struct QfScenario **out);

// Copies one job of a built-in preset, e.g. `("fig2", "q_n5")`.
//
// # Safety
// String arguments must be nul-terminated; `out` must be writable.
enum QfStatus qf_scenario_from_preset(const char *preset,
                                      const char *label,
                                      struct QfScenario **out);

// Sets a dotted config field from a TOML literal, e.g.
// `("drive.amplitude", "7e-3")`. The scenario is unchanged on failure.
//
// # Safety
// `scenario` must be a live handle; strings must be nul-terminated.
enum QfStatus qf_scenario_set(struct QfScenario *scenario, const char *path, const char *value);

// Writes the scenario as TOML into `buf` (nul-terminated). `needed`
// receives the required size including the terminator; pass a null
// `buf` to query it.
//
// # Safety
// `buf` must hold `len` bytes when non-null; `needed` may be null.
enum QfStatus qf_scenario_to_toml(const struct QfScenario *scenario,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

// # Safety
// `scenario` must be null or a handle not yet freed.
void qf_scenario_free(struct QfScenario *scenario);

// Integrates the scenario in memory. An integrator abort returns
// `IntegratorAbort` and still stores the partial trajectory in `out`.
//
// # Safety
// `scenario` must be a live handle and `out` writable.
enum QfStatus qf_simulate(const struct QfScenario *scenario, struct QfTrajectory **out);

// Runs the scenario and writes its artifacts into `dir`, like the
// command-line `run`.
//
// # Safety
// `scenario` must be a live handle and `dir` nul-terminated.
enum QfStatus qf_run_to_dir(const struct QfScenario *scenario, const char *dir);

// # Safety
// `trajectory` must be a live handle and `len` writable.
enum QfStatus qf_trajectory_len(const struct QfTrajectory *trajectory, size_t *len);

// # Safety
// `trajectory` must be a live handle and `out` writable.
enum QfStatus qf_trajectory_sample(const struct QfTrajectory *trajectory,
                                   size_t index,
                                   struct QfSample *out);

// 1 when the integration reached `t_end`, 0 after an abort, -1 for a null handle.
//
// # Safety
// `trajectory` must be null or a live handle.
int qf_trajectory_is_complete(const struct QfTrajectory *trajectory);

// # Safety
// `trajectory` must be null or a handle not yet freed.
void qf_trajectory_free(struct QfTrajectory *trajectory);

// Labels the joint spectrum at `spectrum.n_max` and reports the
// dispersive quantities.
//
// # Safety
// `scenario` must be a live handle and `out` writable.
enum QfStatus qf_dispersive(const struct QfScenario *scenario, struct QfDispersive *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFRAME_H */
