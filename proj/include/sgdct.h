/* C API for the SGDCT fluctuation laboratory.
 *
 * The library simulates continuous-time stochastic gradient descent coupled
 * to an ergodic data diffusion, propagates Malliavin derivatives along the
 * paths, solves the associated 1D Poisson equations by quadrature, and emits
 * versioned CSV artifacts.
 *
 * All state lives behind the opaque sgdct_session handle. Every entry point
 * returns an sgdct_status; on failure sgdct_last_error() carries a message
 * (thread-local, valid until the next failing call on the same thread).
 */
#ifndef SGDCT_H
#define SGDCT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgdct_status {
  SGDCT_OK = 0,
  SGDCT_ERR_CONFIG = 1,   /* invalid configuration, detected before compute */
  SGDCT_ERR_NUMERICAL = 2 /* numerical failure during or after compute */
} sgdct_status;

typedef struct sgdct_session sgdct_session;

const char* sgdct_version(void);
const char* sgdct_schema_version(void);
const char* sgdct_last_error(void);

/* Create a session from a TOML config file or from a builtin preset
 * (example1 | example2_ou | example3_cubic). */
sgdct_status sgdct_session_from_file(const char* config_path, sgdct_session** out);
sgdct_status sgdct_session_from_preset(const char* preset_name, sgdct_session** out);

/* Override a setting before running. Keys: n_paths, seed, dt, t_end, workers,
 * sigma_bar, poisson_theta. Preset sessions accept n_paths/seed/dt/t_end plus
 * the knobs that cannot change results (workers) or only relabel the
 * comparison target (sigma_bar). */
sgdct_status sgdct_session_set(sgdct_session* session, const char* key, const char* value);

/* Run one command into out_dir. Commands for config sessions:
 *   simulate | variance | poisson | malliavin | rates | custom
 * Commands for preset sessions: preset.
 * A short human-readable summary is copied into `summary` (may be NULL). */
sgdct_status sgdct_session_run(sgdct_session* session, const char* command, const char* out_dir,
                               char* summary, size_t summary_len);

typedef struct sgdct_variance_report {
  double c_gbar;
  double h_bar;
  double sigma_bar; /* defined only when divergent == 0 */
  int divergent;
} sgdct_variance_report;

/* Constants pipeline only (no path simulation). */
sgdct_status sgdct_session_variance(sgdct_session* session, sgdct_variance_report* report);

void sgdct_session_free(sgdct_session* session);

#ifdef __cplusplus
}
#endif

#endif /* SGDCT_H */
