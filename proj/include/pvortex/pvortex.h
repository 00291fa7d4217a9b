/* C interface to the pvortex library.
 *
 * Objects are opaque handles created by pv_*_create / returned through out
 * parameters and released with the matching pv_*_destroy. Every fallible call
 * returns a pv_status; on failure pv_last_error() describes the problem for
 * the calling thread until its next failing call.
 *
 * Vortex positions travel as flat arrays x1, y1, x2, y2, ... of length 2N.
 * Vortex indices are 0-based.
 */
#ifndef PVORTEX_H
#define PVORTEX_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(PV_BUILDING_LIBRARY)
#define PV_API __declspec(dllexport)
#else
#define PV_API __declspec(dllimport)
#endif
#else
#define PV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pv_status {
    PV_OK = 0,
    PV_ERR_USAGE = 1,      /* bad argument or violated precondition */
    PV_ERR_DOMAIN = 2,     /* invalid state: coincident vortices, y <= 0 in the half-plane */
    PV_ERR_ORACLE = 3,     /* finite-difference step too large for the state */
    PV_ERR_DIAGNOSTIC = 4, /* computation ran but gave no trustworthy answer */
    PV_ERR_IO = 5,
    PV_ERR_SCHEMA = 6,     /* config document rejected; message names the field */
    PV_ERR_INTERNAL = 7
} pv_status;

typedef enum pv_domain { PV_PLANE = 0, PV_HALF_PLANE = 1 } pv_domain;

typedef enum pv_event_kind {
    PV_EVENT_ALIGNMENT = 0,
    PV_EVENT_STOP = 1,
    PV_EVENT_COLLISION = 2
} pv_event_kind;

typedef enum pv_termination {
    PV_TERM_TIME_END = 0,
    PV_TERM_NEAR_COLLISION = 1,
    PV_TERM_STEP_FAILURE = 2
} pv_termination;

typedef enum pv_regime {
    PV_REGIME_ESCAPE = 0,
    PV_REGIME_KINK_OR_LEAPFROG = 1,
    PV_REGIME_CUSP = 2,
    PV_REGIME_SMOOTH_PASS = 3
} pv_regime;

typedef struct pv_system pv_system;
typedef struct pv_trajectory pv_trajectory;
typedef struct pv_run pv_run;

typedef struct pv_integrator_config {
    double rel_tol;
    double abs_tol;
    double max_step;
    double t_end;
    double output_interval;
    double collision_guard;
    double event_refine_tol;
    double stop_threshold;
    /* 2 * n_alignment_pairs indices (i0, j0, i1, j1, ...); may be NULL when
     * n_alignment_pairs == 0, which watches every pair for N == 2 only. */
    const size_t* alignment_pairs;
    size_t n_alignment_pairs;
} pv_integrator_config;

/* Diagnostics absent for an event kind are NaN. */
typedef struct pv_event {
    pv_event_kind kind;
    double time;
    size_t i;
    size_t j;
    double xdot_i, xdot_j;
    double ydot_i, ydot_j;
    double y_i, y_j;
    double clearance;
} pv_event;

typedef struct pv_bifurcation {
    double lambda;
    double critical_w;
    double stop_ratio;
    double cross_ratio_at_stop;
    double residual;
    int iterations;
    int has_alignment;
    pv_event alignment;
} pv_bifurcation;

typedef struct pv_plot_options {
    double width_px;
    double stroke_width;
    int show_events;
} pv_plot_options;

PV_API const char* pv_version(void);
PV_API const char* pv_last_error(void);
PV_API const char* pv_status_name(pv_status status);
PV_API const char* pv_event_kind_name(pv_event_kind kind);
PV_API const char* pv_termination_name(pv_termination term);
PV_API const char* pv_regime_name(pv_regime regime);

/* ---- systems and instantaneous quantities ---- */

PV_API pv_status pv_system_create(pv_domain domain, const double* strengths, size_t n, pv_system** out);
PV_API void pv_system_destroy(pv_system* sys);
PV_API size_t pv_system_size(const pv_system* sys);
PV_API pv_domain pv_system_domain(const pv_system* sys);
PV_API double pv_system_strength(const pv_system* sys, size_t i);

PV_API pv_status pv_hamiltonian(const pv_system* sys, const double* xy, double* out);
/* out_uv receives 2N values u1, v1, u2, v2, ... */
PV_API pv_status pv_velocity(const pv_system* sys, const double* xy, double* out_uv);
/* Conserved quantities in CSV column order (H, P, then Q, I or W).
 * *count is always set; values are written when capacity allows. */
PV_API pv_status pv_invariants(const pv_system* sys, const double* xy, double* out, size_t capacity,
                               size_t* count);
PV_API pv_status pv_invariant_name(const pv_system* sys, size_t k, const char** name);

/* ---- integration ---- */

PV_API void pv_integrator_config_default(pv_integrator_config* cfg);
PV_API pv_status pv_integrate(const pv_system* sys, const double* xy, const pv_integrator_config* cfg,
                              pv_trajectory** out);
PV_API void pv_trajectory_destroy(pv_trajectory* traj);
PV_API size_t pv_trajectory_sample_count(const pv_trajectory* traj);
PV_API size_t pv_trajectory_vortex_count(const pv_trajectory* traj);
/* xy may be NULL. */
PV_API pv_status pv_trajectory_sample(const pv_trajectory* traj, size_t k, double* t, double* xy);
PV_API size_t pv_trajectory_event_count(const pv_trajectory* traj);
/* xy (the state at the event) may be NULL. */
PV_API pv_status pv_trajectory_event(const pv_trajectory* traj, size_t k, pv_event* event, double* xy);
PV_API pv_termination pv_trajectory_termination(const pv_trajectory* traj);
/* Max |v - v0| / max(1, |v0|) over the samples for quantity `name`. */
PV_API pv_status pv_trajectory_relative_drift(const pv_trajectory* traj, const char* name, double* out);
PV_API pv_status pv_trajectory_write_csv(const pv_trajectory* traj, const char* path);
/* opts may be NULL for defaults. */
PV_API pv_status pv_trajectory_plot_svg(const pv_trajectory* traj, const char* path, const pv_plot_options* opts);
PV_API pv_status pv_plot_csv(const char* csv_path, const char* svg_path, const pv_plot_options* opts);

/* ---- run inputs, config files and manifests ---- */

PV_API pv_status pv_run_create(const pv_system* sys, const double* xy, const pv_integrator_config* cfg,
                               pv_run** out);
PV_API pv_status pv_run_read_config(const char* path, pv_run** out);
PV_API void pv_run_destroy(pv_run* run);
/* Borrowed; valid while the run lives. */
PV_API const pv_system* pv_run_system(const pv_run* run);
PV_API pv_status pv_run_initial_state(const pv_run* run, double* xy);
/* alignment_pairs points into the run. */
PV_API pv_status pv_run_config(const pv_run* run, pv_integrator_config* cfg);
PV_API pv_status pv_run_execute(const pv_run* run, pv_trajectory** out, double* wall_time_s);
PV_API pv_status pv_run_write_manifest(const pv_run* run, const pv_trajectory* traj, const char* command,
                                       double wall_time_s, const char* path);

/* ---- two-vortex half-plane bifurcation, strengths (1, lambda) ---- */

PV_API pv_status pv_critical_w(double lambda, pv_bifurcation* out);
/* cfg may be NULL for defaults. */
PV_API pv_status pv_find_cusp(double lambda, double ratio_lo, double ratio_hi, const pv_integrator_config* cfg,
                              pv_bifurcation* out);
PV_API pv_status pv_cross_ratio(double a, double b, double c, double d, double* out);
PV_API pv_status pv_stop_cross_ratio(double lambda, double* out);
PV_API pv_status pv_stop_height_ratio(double lambda, double* out);
PV_API double pv_balance_point(void);
PV_API pv_status pv_alignment_speed(double lambda, double ratio, double* out);
PV_API pv_status pv_interaction_w(const pv_system* sys, const double* xy, double* out);
PV_API pv_status pv_aligned_ratio_for_w(double lambda, double w, double* out);
PV_API pv_status pv_encounter_run(double lambda, double w, const pv_integrator_config* cfg, pv_trajectory** out);
PV_API pv_status pv_classify_regime(const pv_trajectory* traj, double lambda, pv_regime* out);
PV_API pv_status pv_cusp_exponent(const pv_trajectory* traj, size_t event_index, double* slope);

/* ---- verification suites ---- */

typedef void (*pv_report_fn)(const char* name, int passed, const char* summary, void* user);
/* suite: "scenarios", "bifurcation", "conservation", "grobli" or "all".
 * Calls report once per scenario in order; *all_passed may be NULL. */
PV_API pv_status pv_verify(const char* suite, pv_report_fn report, void* user, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
