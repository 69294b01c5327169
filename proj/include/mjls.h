/* C interface to the switched-system estimation / synthesis library.
 *
 * Conventions:
 *  - All functions return a status code (MJLS_OK on success); out-parameters
 *    are written only on success.
 *  - Strings returned through char** are heap-allocated; release them with
 *    mjls_string_free.
 *  - Requests and replies are JSON documents; mode labels are 1-based.
 *  - mjls_last_error() returns a thread-local description of the most recent
 *    failure ("" when the last call succeeded).
 */
#ifndef MJLS_H
#define MJLS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MJLS_OK 0
#define MJLS_ERR_INTERNAL 1
#define MJLS_ERR_INVALID 2
#define MJLS_ERR_INFEASIBLE 3
#define MJLS_ERR_RESOURCE 4

typedef struct mjls_model mjls_model;

const char* mjls_last_error(void);

/* Model lifecycle. JSON schema: n_modes, ns, na, ny, A, B, C (arrays of
 * row-major matrices), optional P. */
int mjls_model_parse(const char* json_text, mjls_model** out);
int mjls_model_load(const char* path, mjls_model** out);
int mjls_model_to_json(const mjls_model* model, char** out_json);
void mjls_model_free(mjls_model* model);

void mjls_string_free(char* s);

/* Mode estimation over explicit data.
 * Request: {"y": [[...], ...],            outputs y_0..y_T
 *           "u": [[...], ...],            controls u_0..u_{T-1}
 *           "n_c": 2, "tol": 1e-8}        optional
 * Reply:   {"steps": [{"t", "window", "n_theta", "theta" (1-based paths),
 *                      "grown", "reset", "harvested" (1-based pairs)}...]} */
int mjls_estimate(const mjls_model* model, const char* request_json,
                  char** out_json);

/* Mode-observability scan over window lengths 1..n_max.
 * Request: {"n_max": 3, "budget": 2000000}  (both optional)
 * Reply:   {"results": [{"N", "alpha", "omega", "holds", "pairs_tested",
 *                        "witness" (1-based path pair, when holds=false)}...],
 *           "weak_index": N or null} */
int mjls_observability(const mjls_model* model, const char* request_json,
                       char** out_json);

/* Controller synthesis.
 * Request: {"kind": "robust"|"stochastic"|"dr",
 *           "counts": [[...]],   observed transition counts (kind dr)
 *           "beta": 0.05,        confidence for the ambiguity radius (dr)
 *           "allow_shrink": true|false}  (optional)
 * Reply:   {"K", "gamma", "alpha", "delta", "shrink", "margins",
 *           "worst_margin", "M" (state-feedback gains)}
 * Returns MJLS_ERR_INFEASIBLE when no gain certifies. */
int mjls_synthesize(const mjls_model* model, const char* request_json,
                    char** out_json);

/* Closed-loop experiment.
 * Request: {"controller": "none"|"random"|"robust"|"stochastic"|"dr",
 *           "T": 100, "seed": 0, "n_c": 2, "epsilon": 1e-6,
 *           "theta0": 1 (1-based), "x0": [...],
 *           "disturbance": {"time": 50, "dx": [...]},
 *           "synth_period": 10}   (all optional except controller)
 * Reply:   {"csv": "<trajectory table>",
 *           "summary": {"terminal_window", "max_theta", "harvested_total",
 *                       "harvested_correct", "resets", "coverage_ok",
 *                       "terminal_norm", "first_gain_update_t"}} */
int mjls_simulate(const mjls_model* model, const char* request_json,
                  char** out_json);

/* Repeated seeded trials of the same experiment.
 * Request: simulate request plus {"trials": n}.
 * Reply:   {"n_trials", "terminal_window3", "terminal_windows", "max_theta",
 *           "harvested_total", "harvested_correct", "coverage_ok",
 *           "mean_terminal_norm"} */
int mjls_batch(const mjls_model* model, const char* request_json,
               char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* MJLS_H */
