#ifndef HEOMKIT_H
#define HEOMKIT_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(HEOMKIT_BUILDING)
#define HK_API __declspec(dllexport)
#else
#define HK_API __declspec(dllimport)
#endif
#else
#define HK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns HK_OK or an error code; hk_last_error() then holds the
   message for the calling thread until its next failing call. */
typedef enum hk_status
{
    HK_OK = 0,
    HK_ERR_INVALID_ARGUMENT = 1,
    HK_ERR_DIMENSION_MISMATCH = 2,
    HK_ERR_DEGENERATE_PARAMETER = 3,
    HK_ERR_NOT_CONVERGED = 4,
    HK_ERR_NUMERICAL_FAILURE = 5,
    HK_ERR_BUDGET_EXCEEDED = 6,
    HK_ERR_IO = 7,
    HK_ERR_INTERNAL = 99
} hk_status;

typedef struct hk_bath hk_bath;
typedef struct hk_model hk_model;
typedef struct hk_trajectory hk_trajectory;
typedef struct hk_scenario hk_scenario;

HK_API const char* hk_version(void);
HK_API const char* hk_last_error(void);
HK_API const char* hk_status_name(hk_status status);

/* ---- baths ---- */
HK_API hk_status hk_bath_lorentz(double lambda, double gamma, double center, hk_bath** out);
HK_API hk_status hk_bath_ohmic_drude(double eta, double cutoff, hk_bath** out);
HK_API void hk_bath_free(hk_bath* bath);
/* J(omega), omega >= 0 */
HK_API hk_status hk_bath_spectral_density(const hk_bath* bath, double omega, double* value);
/* C(t) by direct quadrature of the spectral integral */
HK_API hk_status hk_bath_correlation(const hk_bath* bath, double temperature, double t, double* re, double* im);
/* Exponential expansion: Lorentz at T = 0 (terms ignored) or Ohmic-Drude with `terms`
   Matsubara terms. Writes up to `capacity` entries; *count receives the full size. */
HK_API hk_status hk_bath_expansion(const hk_bath* bath, double temperature, int terms, double* alpha_re,
                                   double* alpha_im, double* beta_re, double* beta_im, size_t capacity,
                                   size_t* count);

/* ---- models ---- */
HK_API hk_status hk_model_dephasing(double omega0, hk_model** out);
HK_API hk_status hk_model_two_qubit(double omega0, double g0, hk_model** out);
/* Column-major complex matrices as interleaved (re, im) pairs, 2 * dim * dim doubles each.
   dim must be 2 or 4 (the coherence observable is sigma_x of the first qubit). */
HK_API hk_status hk_model_custom(int dim, const double* hamiltonian, const double* coupling, const double* rho0,
                                 double system_frequency, hk_model** out);
HK_API void hk_model_free(hk_model* model);
HK_API int hk_model_dimension(const hk_model* model);

/* ---- solvers ----
   record_interval must divide t_final; dt_max <= 0 selects the default step. */
HK_API hk_status hk_solve_heom(const hk_model* model, const hk_bath* bath, double temperature, int depth,
                               int terms, double t_final, double record_interval, double dt_max,
                               hk_trajectory** out);
/* Refines depth (start 4, step 2, up to max_depth) and doubles the Matsubara count
   up to max_terms until sup-norm changes drop below tol. *converged is 0 for a
   best-effort result. */
HK_API hk_status hk_solve_heom_converged(const hk_model* model, const hk_bath* bath, double temperature,
                                         double tol, int max_depth, int max_terms, double t_final,
                                         double record_interval, hk_trajectory** out, int* converged);
HK_API hk_status hk_solve_born_markov(const hk_model* model, const hk_bath* bath, double temperature,
                                      double t_final, double record_interval, double dt_max, hk_trajectory** out);

HK_API void hk_trajectory_free(hk_trajectory* traj);
HK_API size_t hk_trajectory_length(const hk_trajectory* traj);
HK_API hk_status hk_trajectory_times(const hk_trajectory* traj, double* out, size_t capacity);
HK_API hk_status hk_trajectory_values(const hk_trajectory* traj, const char* observable, double* out,
                                      size_t capacity);
HK_API hk_status hk_trajectory_diagnostics(const hk_trajectory* traj, double* max_trace_drift,
                                           double* max_hermiticity_residue, double* min_eigenvalue);
/* JSON text; *required receives strlen + 1, the copy is truncated to capacity. */
HK_API hk_status hk_trajectory_metadata(const hk_trajectory* traj, char* buffer, size_t capacity,
                                        size_t* required);

/* ---- analysis ---- */
/* sqrt(2/pi) int cos(w t) x(t) dt on a uniform grid starting at t = 0 */
HK_API hk_status hk_cosine_spectrum(const double* times, const double* signal, size_t n, const double* omega,
                                    size_t m, double* out);
/* Peak count with the given relative prominence threshold; locations by decreasing height. */
HK_API hk_status hk_classify_peaks(const double* omega, const double* values, size_t m, double threshold,
                                   double* locations, size_t capacity, size_t* count);
HK_API hk_status hk_solve_zeta(const hk_bath* bath, double temperature, double omega0, double* zeta);
HK_API hk_status hk_effective_spectral_density(const hk_bath* bath, double temperature, double omega0, double g0,
                                               double zeta, const double* omega, size_t m, double* jeff);

/* ---- scenarios ---- */
HK_API hk_status hk_scenario_from_preset(const char* name, hk_scenario** out);
HK_API hk_status hk_scenario_from_json(const char* json_text, hk_scenario** out);
HK_API hk_status hk_scenario_from_file(const char* path, hk_scenario** out);
HK_API void hk_scenario_free(hk_scenario* scenario);
HK_API hk_status hk_scenario_set_kind(hk_scenario* scenario, const char* tag);
HK_API hk_status hk_scenario_set_output(hk_scenario* scenario, const char* directory);
HK_API hk_status hk_scenario_set_max_depth(hk_scenario* scenario, int max_depth);
HK_API hk_status hk_scenario_set_max_matsubara(hk_scenario* scenario, int max_matsubara);
HK_API hk_status hk_scenario_set_tolerance(hk_scenario* scenario, double tol);
HK_API hk_status hk_scenario_set_threads(hk_scenario* scenario, int threads);
HK_API hk_status hk_scenario_set_plot_script(hk_scenario* scenario, int enabled);
HK_API hk_status hk_scenario_config_json(const hk_scenario* scenario, char* buffer, size_t capacity,
                                         size_t* required);
/* Validates, runs and writes all files. *converged is 0 when any run is best effort. */
HK_API hk_status hk_scenario_run(hk_scenario* scenario, int* converged);
/* Summary of the last run as JSON text. */
HK_API hk_status hk_scenario_summary_json(const hk_scenario* scenario, char* buffer, size_t capacity,
                                          size_t* required);
/* Names of the bundled presets, comma separated. */
HK_API const char* hk_preset_names(void);

/* Compares "path[:column]" tables; the grids (first columns) must match. */
HK_API hk_status hk_compare_files(const char* a, const char* b, double tolerance, double* sup, double* rms,
                                  int* pass);

#ifdef __cplusplus
}
#endif

#endif
