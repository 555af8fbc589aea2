#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regatta/eval.hpp"
#include "regatta/evo.hpp"
#include "regatta/gbdt.hpp"
#include "regatta/graph.hpp"
#include "regatta/surrogate.hpp"
#include "regatta/windsim.hpp"

namespace regatta {

struct ScenarioGenParams {
    int training_count = 20;
    int holdout_count = 10;  // H
    int steps = 90;
    InitialStateParams initial;
    PerturbParams perturb;
    GustParams gusts;
};

// One JSON document drives a whole experiment; the master seed expands into
// per-subsystem streams via derive_seed (see rng.hpp).
struct ExperimentConfig {
    std::string court_path;
    std::string polar_path;  // empty = built-in default polar
    std::string out_dir = "out";
    ScenarioGenParams scenarios;
    EvoParams evo;
    gbdt::GbdtParams gbdt;
    EdgeCostModel cost_model;
    double epsilon_fraction = 0.01;  // gate epsilon as a fraction of the base cost
    double accuracy_gate = 0.75;
    int min_train_rows = 500;
    int tune_below_rows = 1500;
    double audit_fraction = 0.05;
    int shards = 1;
    bool surrogate = false;
    std::uint64_t master_seed = 1;
};

ExperimentConfig load_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);
void save_config_file(const ExperimentConfig& config, const std::string& path);

// Seed streams drawn from the master seed.
enum SeedStream : std::uint64_t {
    kSeedScenarioInit = 1,
    kSeedScenarioSim = 2,
    kSeedHoldoutInit = 3,
    kSeedHoldoutSim = 4,
    kSeedEvolution = 5,
    kSeedSurrogate = 6,
};

std::uint64_t fnv1a64_file(const std::string& path);

// Writes training and holdout scenario files plus manifest.json.
struct GenScenariosResult {
    std::vector<std::string> training_files;
    std::vector<std::string> holdout_files;
    std::string manifest_path;
};
GenScenariosResult cmd_gen_scenarios(const ExperimentConfig& config);

// Computes the static optimum s_w0 for W_0 (the initial field of training
// scenario 0) and writes the route and its cost.
struct SolveExactResult {
    Route route;
    double cost_s = 0.0;
    std::string route_path;
};
SolveExactResult cmd_solve_exact(const ExperimentConfig& config);

struct TopSolution {
    Chromosome chromosome;
    double aggregate_cost = 0.0;
};

struct EvolveResult {
    double best_aggregate = 0.0;       // over all true evaluations of the run
    std::vector<TopSolution> top;      // 10 best distinct chromosomes
    EvalStats totals;
    double wall_time_s = 0.0;
    int generations = 0;
    int activation_generation = -1;    // first generation the surrogate gated, -1 = never
    std::uint64_t cache_lookups = 0;
    std::uint64_t cache_hits = 0;
    std::string log_path;
};
EvolveResult cmd_evolve(const ExperimentConfig& config);

struct HoldoutReport {
    // Mean holdout cost per solution; index 0 is s_w0, then the top list.
    std::vector<double> mean_costs;
    std::vector<int> wins;  // scenarios where solution beats s_w0, per top entry
    int scenario_count = 0;
    int row_count = 0;
    std::string report_path;
};
HoldoutReport cmd_holdout_eval(const ExperimentConfig& config);

struct BenchReport {
    double ungated_s = 0.0;
    double gated_s = 0.0;
    double speedup = 0.0;
    double ungated_best = 0.0;
    double gated_best = 0.0;
    double cost_delta_pct = 0.0;
    std::uint64_t gated_forecasts = 0;
    std::uint64_t ungated_cache_hits = 0;
    std::uint64_t gated_cache_hits = 0;
    std::string report_path;
};
BenchReport cmd_bench(const ExperimentConfig& config);

// Rebuilds the offline GBDT study from an evolve run's cache dump.
struct TrainOfflineResult {
    OfflineStudy study;
    std::string metrics_path;
};
TrainOfflineResult cmd_train_offline(const ExperimentConfig& config,
                                     const std::string& dump_path = "");

// Checkpoint text: `x,y;x,y;...|fitness|aggregate|state` per individual.
void write_population_file(const std::vector<Individual>& pop, const std::string& path);
Chromosome parse_chromosome_key(const std::string& key);

}  // namespace regatta
