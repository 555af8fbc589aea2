/* C API for the regatta route-optimization toolkit.
 *
 * The library is a C++ core exported behind opaque handles and status codes
 * so it can be driven from C, FFI bindings, or the bundled CLI. All handles
 * are created by regatta_*_open / _load functions and must be released with
 * the matching _close. Functions return REGATTA_OK on success; on any other
 * status, regatta_last_error() describes the failure (thread-local).
 */
#ifndef REGATTA_C_API_H
#define REGATTA_C_API_H

#include <stdint.h>

#if defined(_WIN32)
#define REGATTA_API __declspec(dllexport)
#else
#define REGATTA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum regatta_status {
    REGATTA_OK = 0,
    REGATTA_ERR_IO = 1,
    REGATTA_ERR_PARSE = 2,
    REGATTA_ERR_INVALID = 3,
    REGATTA_ERR_INFEASIBLE = 4,
    REGATTA_ERR_INTERNAL = 5
} regatta_status;

REGATTA_API const char* regatta_version(void);
REGATTA_API const char* regatta_last_error(void);

/* ---- world handles ---------------------------------------------------- */

typedef struct regatta_court regatta_court;
typedef struct regatta_polar regatta_polar;
typedef struct regatta_scenario regatta_scenario;
typedef struct regatta_route regatta_route;
typedef struct regatta_model regatta_model;

REGATTA_API regatta_status regatta_court_open(const char* path, regatta_court** out);
REGATTA_API void regatta_court_close(regatta_court* court);
REGATTA_API int regatta_court_width(const regatta_court* court);
REGATTA_API int regatta_court_height(const regatta_court* court);
REGATTA_API double regatta_court_cell_size_m(const regatta_court* court);
REGATTA_API int regatta_court_is_navigable(const regatta_court* court, int x, int y);

/* Passing NULL as path loads the built-in default polar. */
REGATTA_API regatta_status regatta_polar_open(const char* path, regatta_polar** out);
REGATTA_API void regatta_polar_close(regatta_polar* polar);
REGATTA_API double regatta_polar_speed(const regatta_polar* polar, double true_wind_angle_deg,
                                       double wind_speed_mps);

REGATTA_API regatta_status regatta_scenario_open(const char* path, regatta_scenario** out);
REGATTA_API void regatta_scenario_close(regatta_scenario* scenario);
REGATTA_API int regatta_scenario_steps(const regatta_scenario* scenario);
REGATTA_API regatta_status regatta_scenario_wind(const regatta_scenario* scenario, int t, int x,
                                                 int y, double* speed_mps, double* angle_deg);

REGATTA_API regatta_status regatta_route_open(const char* path, const regatta_court* court,
                                              regatta_route** out);
REGATTA_API void regatta_route_close(regatta_route* route);
REGATTA_API int regatta_route_length(const regatta_route* route); /* number of steps */
REGATTA_API regatta_status regatta_route_step(const regatta_route* route, int i, int* x, int* y,
                                              int* starboard);

/* Cost of the route under a scenario with default maneuver penalties.
 * Returns REGATTA_ERR_INFEASIBLE when the route cannot be sailed. */
REGATTA_API regatta_status regatta_route_cost(const regatta_route* route,
                                              const regatta_scenario* scenario,
                                              const regatta_court* court,
                                              const regatta_polar* polar, double* cost_s);

/* Trained GBDT models saved by the toolkit. */
REGATTA_API regatta_status regatta_model_open(const char* path, regatta_model** out);
REGATTA_API void regatta_model_close(regatta_model* model);
REGATTA_API regatta_status regatta_model_predict(const regatta_model* model,
                                                 const double* features, int n_features,
                                                 double* out);

/* ---- experiment commands ---------------------------------------------- */

typedef struct regatta_run_options {
    const char* config_path; /* required */
    const char* out_dir;     /* optional override, NULL keeps the config value */
    const char* dump_path;   /* train-offline only; NULL = out_dir/cache_dump.csv */
    uint64_t seed;           /* used when has_seed != 0 */
    int has_seed;
    int shards;              /* used when > 0 */
    int surrogate;           /* -1 keep config, 0 off, 1 on */
} regatta_run_options;

REGATTA_API void regatta_run_options_init(regatta_run_options* opts);

REGATTA_API regatta_status regatta_cmd_gen_scenarios(const regatta_run_options* opts);
REGATTA_API regatta_status regatta_cmd_solve_exact(const regatta_run_options* opts,
                                                   double* cost_s);
REGATTA_API regatta_status regatta_cmd_evolve(const regatta_run_options* opts,
                                              double* best_aggregate);
REGATTA_API regatta_status regatta_cmd_holdout_eval(const regatta_run_options* opts);
REGATTA_API regatta_status regatta_cmd_bench(const regatta_run_options* opts, double* speedup,
                                             double* cost_delta_pct);
REGATTA_API regatta_status regatta_cmd_train_offline(const regatta_run_options* opts);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* REGATTA_C_API_H */
