// Exercises the shared-library surface the way an external C client would:
// no C++ core headers, only regatta/c_api.h.

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "regatta/c_api.h"

namespace fs = std::filesystem;

static int g_failures = 0;

#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            ++g_failures;                                               \
        }                                                               \
    } while (0)

static std::string write_fixture(const std::string& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir + "/court.json") << R"({
      "width": 6, "height": 6, "cell_size_m": 50.0,
      "navigable": ["......", "......", "......", "......", "......", "......"],
      "start": [0, 5], "goal": [5, 0]
    })";
    std::ofstream(dir + "/config.json") << R"({
      "version": 1,
      "court": ")" << dir << R"(/court.json",
      "out_dir": ")" << dir << R"(/out",
      "seed": 11,
      "scenarios": {
        "training_count": 3, "holdout_count": 2, "steps": 6,
        "initial": {"mean_angle_deg": 0.0, "mean_speed_mps": 7.0, "std_speed_mps": 0.8},
        "perturb": {"sigma_speed_mps": 0.3, "sigma_angle_deg": 4.0, "seed_cell_fraction": 0.15}
      },
      "evo": {"population_size": 8, "generations": 2, "length_min": 1, "length_max": 5,
              "family_cap": 3},
      "gbdt": {"n_trees": 10, "num_leaves": 7, "min_data_in_leaf": 3}
    })";
    return dir + "/config.json";
}

int main() {
    const std::string dir = (fs::temp_directory_path() / "regatta_capi").string();
    const std::string config = write_fixture(dir);

    CHECK(std::strlen(regatta_version()) > 0);

    // Error paths: bad paths produce a status and a readable message.
    regatta_court* court = nullptr;
    CHECK(regatta_court_open("/nonexistent/court.json", &court) == REGATTA_ERR_IO);
    CHECK(std::strlen(regatta_last_error()) > 0);

    std::ofstream(dir + "/broken.json") << "{ not json";
    CHECK(regatta_court_open((dir + "/broken.json").c_str(), &court) == REGATTA_ERR_PARSE);

    CHECK(regatta_court_open((dir + "/court.json").c_str(), &court) == REGATTA_OK);
    CHECK(regatta_court_width(court) == 6);
    CHECK(regatta_court_height(court) == 6);
    CHECK(regatta_court_cell_size_m(court) == 50.0);
    CHECK(regatta_court_is_navigable(court, 0, 0) == 1);
    CHECK(regatta_court_is_navigable(court, 99, 0) == 0);

    regatta_polar* polar = nullptr;
    CHECK(regatta_polar_open(nullptr, &polar) == REGATTA_OK);  // built-in table
    CHECK(regatta_polar_speed(polar, 10.0, 8.0) == 0.0);       // no-go zone
    CHECK(regatta_polar_speed(polar, 110.0, 8.0) > 0.0);
    double folded = regatta_polar_speed(polar, 250.0, 8.0);
    CHECK(folded == regatta_polar_speed(polar, 110.0, 8.0));

    // Full pipeline through the command layer.
    regatta_run_options opts;
    regatta_run_options_init(&opts);
    opts.config_path = config.c_str();

    CHECK(regatta_cmd_solve_exact(&opts, nullptr) != REGATTA_OK);  // scenarios missing
    CHECK(regatta_cmd_gen_scenarios(&opts) == REGATTA_OK);
    double sw0_cost = 0;
    CHECK(regatta_cmd_solve_exact(&opts, &sw0_cost) == REGATTA_OK);
    CHECK(sw0_cost > 0);

    double best = 0;
    CHECK(regatta_cmd_evolve(&opts, &best) == REGATTA_OK);
    CHECK(best > 0);
    CHECK(regatta_cmd_holdout_eval(&opts) == REGATTA_OK);
    CHECK(regatta_cmd_train_offline(&opts) == REGATTA_OK);

    // Scenario and route handles over the artifacts the pipeline produced.
    regatta_scenario* scenario = nullptr;
    CHECK(regatta_scenario_open((dir + "/out/scenarios/train_000.wsc").c_str(), &scenario) ==
          REGATTA_OK);
    CHECK(regatta_scenario_steps(scenario) == 6);
    double speed = 0, angle = 0;
    CHECK(regatta_scenario_wind(scenario, 0, 2, 2, &speed, &angle) == REGATTA_OK);
    CHECK(speed > 0);
    CHECK(angle >= 0 && angle < 360);
    CHECK(regatta_scenario_wind(scenario, 99, 0, 0, &speed, &angle) == REGATTA_ERR_INVALID);

    regatta_route* route = nullptr;
    CHECK(regatta_route_open((dir + "/out/sw0.route").c_str(), court, &route) == REGATTA_OK);
    CHECK(regatta_route_length(route) >= 2);
    int x = -1, y = -1, starboard = -1;
    CHECK(regatta_route_step(route, 0, &x, &y, &starboard) == REGATTA_OK);
    CHECK(x == 0);
    CHECK(y == 5);
    CHECK(starboard == 0 || starboard == 1);

    double cost = 0;
    CHECK(regatta_route_cost(route, scenario, court, polar, &cost) == REGATTA_OK);
    CHECK(cost > 0);

    regatta_model* model = nullptr;
    CHECK(regatta_model_open((dir + "/out/regressor.json").c_str(), &model) == REGATTA_OK);
    double features[5] = {1, 2, 3, 0, 0};
    double prediction = 0;
    CHECK(regatta_model_predict(model, features, 5, &prediction) == REGATTA_OK);
    double wrong_width = 0;
    CHECK(regatta_model_predict(model, features, 3, &wrong_width) == REGATTA_ERR_INVALID);

    regatta_model_close(model);
    regatta_route_close(route);
    regatta_scenario_close(scenario);
    regatta_polar_close(polar);
    regatta_court_close(court);

    if (g_failures == 0) std::printf("c_api: all checks passed\n");
    return g_failures == 0 ? 0 : 1;
}
