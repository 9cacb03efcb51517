#ifndef OPO_OPO_H
#define OPO_OPO_H

/* C interface to the OPO simulation and analytics library. Every function
 * returns an opo_status; on failure opo_last_error() describes the problem
 * (thread local, valid until the next failing call on the same thread). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define OPO_API __declspec(dllexport)
#else
#define OPO_API __attribute__((visibility("default")))
#endif

typedef enum {
    OPO_OK = 0,
    OPO_ERR_PARAMETER = 1,  /* invalid argument or configuration */
    OPO_ERR_DOMAIN = 2,     /* outside the validity domain, e.g. mu >= 1 */
    OPO_ERR_USAGE = 3,      /* API misuse: null handle, wrong call order */
    OPO_ERR_SOLVER = 4,     /* root bracketing failed */
    OPO_ERR_ESTIMATOR = 5,  /* too few trajectories, short window, unpaired input */
    OPO_ERR_IO = 6,
    OPO_ERR_INTERNAL = 99
} opo_status;

enum { OPO_POSITIVE_P = 0, OPO_WIGNER = 1 };
enum { OPO_NONLINEAR = 0, OPO_LINEARIZED = 1 };
enum { OPO_QUAD_X = 0, OPO_QUAD_Y = 1 };
enum { OPO_OPT_QUINTIC = 0, OPO_OPT_ASYMPTOTIC = 1, OPO_OPT_DIRECT_SCAN = 2 };
enum { OPO_QUINTIC_CORRECTED = 0, OPO_QUINTIC_AS_PRINTED = 1 };
enum {
    OPO_REGIME_QUINTIC = 0,
    OPO_REGIME_LARGE_GAMMA = 1,
    OPO_REGIME_SMALL_GAMMA = 2,
    OPO_REGIME_DIRECT_SCAN = 3
};
enum { OPO_BRANCH_BELOW = 0, OPO_BRANCH_ABOVE_PLUS = 1, OPO_BRANCH_ABOVE_MINUS = 2 };

/* Which spectrum to fetch from a finished run. */
enum { OPO_SPECTRUM = 0, OPO_DELTA = 1, OPO_DELTA_LINEAR = 2, OPO_DELTA_NONLINEAR = 3 };

typedef struct {
    double g;
    double mu;
    double gamma_r;
} opo_params;

typedef struct {
    double gamma1, gamma2, chi, drive;
} opo_physical;

typedef struct {
    double re_alpha1, im_alpha1, re_alpha2, im_alpha2;
    int branch;
} opo_classical_state;

typedef struct {
    double dtau;
    double tau_max;
    double tau_discard;
    size_t sample_stride;
    size_t noise_substeps;
    int fixed_point_iterations;
} opo_grid;

typedef struct {
    size_t n_traj;
    uint64_t seed;
    int representation;
    int linearization;
    int paired;
    unsigned workers;
} opo_ensemble;

typedef struct {
    double value, std_error, imag;
} opo_estimate;

typedef struct {
    int representation;
    size_t n_traj, n_used;
    opo_estimate x1_sq, y1_sq, x2, y2, triple;
    int has_triple_112;
    opo_estimate triple_112;
    opo_estimate y1_op_sq, y1_op_offset;
} opo_moment_set;

typedef struct {
    size_t n_traj;
    size_t n_divergent;
    int reliable;
    double wall_seconds;
} opo_report;

typedef struct {
    double omega;      /* effective frequency, see README */
    double omega_dft;  /* DFT bin frequency 2 pi k / T */
    double V;
    double std_error;
    double imag_residual;
} opo_spectrum_row;

typedef struct {
    int representation;
    double window, bin_duration;
    int warped;
    size_t n_traj, n_used;
} opo_spectrum_info;

typedef struct {
    int representation;
    double x2_2, y1y1, x1x1, y1y3, triple_112;
    int has_wigner_terms;
    double y2y2, triple_sum;
    double y1_op_sq, y1_op_offset, nonlinear_part;
} opo_analytic_moments;

typedef struct {
    double mu_opt, delta, V_opt;
    int regime;
    int method;
    int iterations;
} opo_optimum;

typedef struct opo_run opo_run;           /* opaque */
typedef struct opo_spectrum opo_spectrum; /* opaque */

typedef void (*opo_progress_fn)(size_t done, size_t total, void* user);

OPO_API const char* opo_version(void);
OPO_API const char* opo_last_error(void);
OPO_API const char* opo_status_name(opo_status s);

/* ---- model ---- */
OPO_API opo_status opo_params_validate(const opo_params* p);
OPO_API opo_status opo_params_from_g2(double g2, double mu, double gamma_r, opo_params* out);
OPO_API opo_status opo_params_from_physical(const opo_physical* phys, opo_params* out);
OPO_API opo_status opo_params_to_physical(const opo_params* p, double gamma1, opo_physical* out);
/* Newline-separated diagnostics (empty when none); buffer is NUL-terminated. */
OPO_API opo_status opo_params_warnings(const opo_params* p, char* buf, size_t cap, size_t* count);
OPO_API opo_status opo_thresholds(const opo_params* p, double* n_c, double* i_c, double* e_c);
OPO_API opo_status opo_classical_steady_state(const opo_params* p, opo_classical_state* out,
                                              size_t cap, size_t* n);

/* ---- analytic ---- */
OPO_API opo_status opo_linear_spectrum(double mu, double omega, int quadrature, double* S,
                                       double* V);
OPO_API opo_status opo_analytic_moments_eval(const opo_params* p, int representation,
                                             opo_analytic_moments* out);
OPO_API opo_status opo_analytic_spectrum(const opo_params* p, int representation, double omega,
                                         double* V);
OPO_API opo_status opo_analytic_spectrum_correction(const opo_params* p, int representation,
                                                    double omega, double* dV);
OPO_API opo_status opo_analytic_internal_spectrum(const opo_params* p, int representation,
                                                  double omega, double* S);
OPO_API opo_status opo_analytic_triple(const opo_params* p, int representation, double* scaled,
                                       double* unscaled);
OPO_API opo_status opo_analytic_triple_spectrum(double mu, double gamma_r, double w1, double w2,
                                                double w3, double* re, double* im);
OPO_API opo_status opo_analytic_v0(const opo_params* p, double* V);
OPO_API opo_status opo_optimal_drive(double gamma_r, double g, int method, int quintic_form,
                                     opo_optimum* out);

/* ---- simulation ---- */
OPO_API void opo_grid_default(opo_grid* out);
OPO_API void opo_ensemble_default(opo_ensemble* out);
OPO_API opo_status opo_grid_bins(const opo_grid* grid, size_t* bins);

OPO_API opo_status opo_run_create(const opo_params* p, const opo_grid* grid,
                                  const opo_ensemble* ens, opo_run** out);
OPO_API void opo_run_destroy(opo_run* run);
OPO_API opo_status opo_run_request_moments(opo_run* run);
/* omega_max <= 0 selects a quarter of the bin Nyquist frequency. */
OPO_API opo_status opo_run_request_spectrum(opo_run* run, int mode, double theta,
                                            double omega_max);
OPO_API opo_status opo_run_request_delta(opo_run* run, int mode, double theta, double omega_max);
OPO_API opo_status opo_run_set_progress(opo_run* run, opo_progress_fn fn, void* user);
/* Raw bin CSV of trajectory `index` (nonlinear member) written after execution. */
OPO_API opo_status opo_run_request_dump(opo_run* run, uint64_t index, const char* path);
OPO_API opo_status opo_run_execute(opo_run* run);
OPO_API opo_status opo_run_report(const opo_run* run, opo_report* out);
OPO_API opo_status opo_run_moments(const opo_run* run, opo_moment_set* out);
OPO_API opo_status opo_run_spectrum(const opo_run* run, int which, opo_spectrum** out);

OPO_API void opo_spectrum_destroy(opo_spectrum* s);
OPO_API size_t opo_spectrum_size(const opo_spectrum* s);
OPO_API opo_status opo_spectrum_info_get(const opo_spectrum* s, opo_spectrum_info* out);
OPO_API opo_status opo_spectrum_row_get(const opo_spectrum* s, size_t i, opo_spectrum_row* out);

#ifdef __cplusplus
}
#endif

#endif
