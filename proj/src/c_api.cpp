#include "regatta/c_api.h"

#include <string>

#include "regatta/court.hpp"
#include "regatta/gbdt.hpp"
#include "regatta/graph.hpp"
#include "regatta/harness.hpp"
#include "regatta/windsim.hpp"

using namespace regatta;

struct regatta_court {
    CourtSpec spec;
};
struct regatta_polar {
    PolarTable table;
};
struct regatta_scenario {
    Scenario scenario;
};
struct regatta_route {
    Route route;
};
struct regatta_model {
    gbdt::GbdtModel model;
};

namespace {

thread_local std::string g_last_error;

regatta_status to_status(std::exception_ptr ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const IoError& e) {
        g_last_error = e.what();
        return REGATTA_ERR_IO;
    } catch (const ParseError& e) {
        g_last_error = e.what();
        return REGATTA_ERR_PARSE;
    } catch (const InfeasibleError& e) {
        g_last_error = e.what();
        return REGATTA_ERR_INFEASIBLE;
    } catch (const InvalidError& e) {
        g_last_error = e.what();
        return REGATTA_ERR_INVALID;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return REGATTA_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return REGATTA_ERR_INTERNAL;
    }
}

template <typename Fn>
regatta_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return REGATTA_OK;
    } catch (...) {
        return to_status(std::current_exception());
    }
}

ExperimentConfig config_from(const regatta_run_options* opts) {
    if (!opts || !opts->config_path) throw InvalidError("options must carry a config path");
    ExperimentConfig config = load_config_file(opts->config_path);
    if (opts->out_dir) config.out_dir = opts->out_dir;
    if (opts->has_seed) config.master_seed = opts->seed;
    if (opts->shards > 0) config.shards = opts->shards;
    if (opts->surrogate == 0) config.surrogate = false;
    if (opts->surrogate == 1) config.surrogate = true;
    return config;
}

}  // namespace

extern "C" {

const char* regatta_version(void) { return "1.0.0"; }

const char* regatta_last_error(void) { return g_last_error.c_str(); }

regatta_status regatta_court_open(const char* path, regatta_court** out) {
    return guarded([&] {
        if (!path || !out) throw InvalidError("null argument");
        *out = new regatta_court{load_court_file(path)};
    });
}

void regatta_court_close(regatta_court* court) { delete court; }

int regatta_court_width(const regatta_court* court) { return court->spec.width_cells; }
int regatta_court_height(const regatta_court* court) { return court->spec.height_cells; }
double regatta_court_cell_size_m(const regatta_court* court) { return court->spec.cell_size_m; }
int regatta_court_is_navigable(const regatta_court* court, int x, int y) {
    return court->spec.is_navigable({x, y}) ? 1 : 0;
}

regatta_status regatta_polar_open(const char* path, regatta_polar** out) {
    return guarded([&] {
        if (!out) throw InvalidError("null argument");
        *out = new regatta_polar{path ? load_polar_file(path) : default_polar()};
    });
}

void regatta_polar_close(regatta_polar* polar) { delete polar; }

double regatta_polar_speed(const regatta_polar* polar, double true_wind_angle_deg,
                           double wind_speed_mps) {
    return polar_speed(polar->table, true_wind_angle_deg, wind_speed_mps);
}

regatta_status regatta_scenario_open(const char* path, regatta_scenario** out) {
    return guarded([&] {
        if (!path || !out) throw InvalidError("null argument");
        *out = new regatta_scenario{read_scenario_file(path)};
    });
}

void regatta_scenario_close(regatta_scenario* scenario) { delete scenario; }

int regatta_scenario_steps(const regatta_scenario* scenario) {
    return scenario->scenario.steps();
}

regatta_status regatta_scenario_wind(const regatta_scenario* scenario, int t, int x, int y,
                                     double* speed_mps, double* angle_deg) {
    return guarded([&] {
        const auto& fields = scenario->scenario.fields;
        if (t < 0 || t >= scenario->scenario.steps()) throw InvalidError("time index out of range");
        const WindField& field = fields[static_cast<size_t>(t)];
        if (!field.in_bounds(x, y)) throw InvalidError("cell out of range");
        if (speed_mps) *speed_mps = field.at(x, y).speed_mps;
        if (angle_deg) *angle_deg = field.at(x, y).angle_deg;
    });
}

regatta_status regatta_route_open(const char* path, const regatta_court* court,
                                  regatta_route** out) {
    return guarded([&] {
        if (!path || !court || !out) throw InvalidError("null argument");
        *out = new regatta_route{read_route_file(path, court->spec)};
    });
}

void regatta_route_close(regatta_route* route) { delete route; }

int regatta_route_length(const regatta_route* route) {
    return static_cast<int>(route->route.steps.size());
}

regatta_status regatta_route_step(const regatta_route* route, int i, int* x, int* y,
                                  int* starboard) {
    return guarded([&] {
        if (i < 0 || i >= static_cast<int>(route->route.steps.size()))
            throw InvalidError("step index out of range");
        const RouteStep& step = route->route.steps[static_cast<size_t>(i)];
        if (x) *x = step.cell.x;
        if (y) *y = step.cell.y;
        if (starboard) *starboard = step.mode == SailingMode::starboard ? 1 : 0;
    });
}

regatta_status regatta_route_cost(const regatta_route* route, const regatta_scenario* scenario,
                                  const regatta_court* court, const regatta_polar* polar,
                                  double* cost_s) {
    return guarded([&] {
        if (!route || !scenario || !court || !polar || !cost_s)
            throw InvalidError("null argument");
        EdgeCostModel m;
        auto cost = route_cost(route->route, scenario->scenario, court->spec, polar->table, m);
        if (!cost) throw InfeasibleError("route infeasible under this scenario");
        *cost_s = *cost;
    });
}

regatta_status regatta_model_open(const char* path, regatta_model** out) {
    return guarded([&] {
        if (!path || !out) throw InvalidError("null argument");
        *out = new regatta_model{gbdt::load_model_file(path)};
    });
}

void regatta_model_close(regatta_model* model) { delete model; }

regatta_status regatta_model_predict(const regatta_model* model, const double* features,
                                     int n_features, double* out) {
    return guarded([&] {
        if (!model || !features || !out) throw InvalidError("null argument");
        *out = model->model.predict(
            std::span<const double>(features, static_cast<size_t>(n_features)));
    });
}

void regatta_run_options_init(regatta_run_options* opts) {
    if (!opts) return;
    opts->config_path = nullptr;
    opts->out_dir = nullptr;
    opts->dump_path = nullptr;
    opts->seed = 0;
    opts->has_seed = 0;
    opts->shards = 0;
    opts->surrogate = -1;
}

regatta_status regatta_cmd_gen_scenarios(const regatta_run_options* opts) {
    return guarded([&] { cmd_gen_scenarios(config_from(opts)); });
}

regatta_status regatta_cmd_solve_exact(const regatta_run_options* opts, double* cost_s) {
    return guarded([&] {
        SolveExactResult result = cmd_solve_exact(config_from(opts));
        if (cost_s) *cost_s = result.cost_s;
    });
}

regatta_status regatta_cmd_evolve(const regatta_run_options* opts, double* best_aggregate) {
    return guarded([&] {
        EvolveResult result = cmd_evolve(config_from(opts));
        if (best_aggregate) *best_aggregate = result.best_aggregate;
    });
}

regatta_status regatta_cmd_holdout_eval(const regatta_run_options* opts) {
    return guarded([&] { cmd_holdout_eval(config_from(opts)); });
}

regatta_status regatta_cmd_bench(const regatta_run_options* opts, double* speedup,
                                 double* cost_delta_pct) {
    return guarded([&] {
        BenchReport report = cmd_bench(config_from(opts));
        if (speedup) *speedup = report.speedup;
        if (cost_delta_pct) *cost_delta_pct = report.cost_delta_pct;
    });
}

regatta_status regatta_cmd_train_offline(const regatta_run_options* opts) {
    return guarded([&] {
        cmd_train_offline(config_from(opts), opts->dump_path ? opts->dump_path : "");
    });
}

}  // extern "C"
