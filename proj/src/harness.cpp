#include "regatta/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace regatta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void get_if_present(const json& j, const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
}
void get_if_present(const json& j, const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
}
void get_if_present(const json& j, const char* key, bool& out) {
    if (j.contains(key)) out = j.at(key).get<bool>();
}
void get_if_present(const json& j, const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
}
void get_if_present(const json& j, const char* key, std::uint64_t& out) {
    if (j.contains(key)) out = j.at(key).get<std::uint64_t>();
}

}  // namespace

ExperimentConfig load_config(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (doc.value("version", 0) != 1) throw ParseError("config version must be 1");

    ExperimentConfig c;
    get_if_present(doc, "court", c.court_path);
    get_if_present(doc, "polar", c.polar_path);
    get_if_present(doc, "out_dir", c.out_dir);
    get_if_present(doc, "seed", c.master_seed);
    get_if_present(doc, "shards", c.shards);
    get_if_present(doc, "surrogate", c.surrogate);
    if (c.court_path.empty()) throw InvalidError("config needs a court path");

    if (doc.contains("scenarios")) {
        const json& s = doc["scenarios"];
        get_if_present(s, "training_count", c.scenarios.training_count);
        get_if_present(s, "holdout_count", c.scenarios.holdout_count);
        get_if_present(s, "steps", c.scenarios.steps);
        if (s.contains("initial")) {
            const json& i = s["initial"];
            get_if_present(i, "mean_angle_deg", c.scenarios.initial.mean_angle_deg);
            get_if_present(i, "std_angle_deg", c.scenarios.initial.std_angle_deg);
            get_if_present(i, "mean_speed_mps", c.scenarios.initial.mean_speed_mps);
            get_if_present(i, "std_speed_mps", c.scenarios.initial.std_speed_mps);
            get_if_present(i, "west_east_speed_slope", c.scenarios.initial.west_east_speed_slope);
            get_if_present(i, "west_angle_perp_bias_deg",
                           c.scenarios.initial.west_angle_perp_bias_deg);
        }
        if (s.contains("perturb")) {
            const json& p = s["perturb"];
            get_if_present(p, "sigma_speed_mps", c.scenarios.perturb.sigma_speed_mps);
            get_if_present(p, "sigma_angle_deg", c.scenarios.perturb.sigma_angle_deg);
            get_if_present(p, "seed_cell_fraction", c.scenarios.perturb.seed_cell_fraction);
            get_if_present(p, "spread_decay", c.scenarios.perturb.spread_decay);
        }
        if (s.contains("gusts")) {
            const json& g = s["gusts"];
            get_if_present(g, "mean_inter_gust_s", c.scenarios.gusts.mean_inter_gust_s);
            get_if_present(g, "mean_length_s", c.scenarios.gusts.mean_length_s);
            get_if_present(g, "std_length_s", c.scenarios.gusts.std_length_s);
            get_if_present(g, "mean_angle_delta_deg", c.scenarios.gusts.mean_angle_delta_deg);
            get_if_present(g, "std_angle_delta_deg", c.scenarios.gusts.std_angle_delta_deg);
            get_if_present(g, "mean_speed_delta_mps", c.scenarios.gusts.mean_speed_delta_mps);
            get_if_present(g, "std_speed_delta_mps", c.scenarios.gusts.std_speed_delta_mps);
        }
    }
    if (doc.contains("evo")) {
        const json& e = doc["evo"];
        get_if_present(e, "population_size", c.evo.population_size);
        get_if_present(e, "generations", c.evo.generations);
        get_if_present(e, "length_min", c.evo.length_min);
        get_if_present(e, "length_max", c.evo.length_max);
        get_if_present(e, "crossover_rate", c.evo.crossover_rate);
        get_if_present(e, "mutation_rate", c.evo.mutation_rate);
        get_if_present(e, "family_cap", c.evo.family_cap);
        get_if_present(e, "elitism_count", c.evo.elitism_count);
        get_if_present(e, "mutation_radius_cells", c.evo.mutation_radius_cells);
    }
    if (doc.contains("gbdt")) {
        const json& g = doc["gbdt"];
        get_if_present(g, "num_leaves", c.gbdt.num_leaves);
        get_if_present(g, "min_data_in_leaf", c.gbdt.min_data_in_leaf);
        get_if_present(g, "lambda_l1", c.gbdt.lambda_l1);
        get_if_present(g, "lambda_l2", c.gbdt.lambda_l2);
        get_if_present(g, "learning_rate", c.gbdt.learning_rate);
        get_if_present(g, "n_trees", c.gbdt.n_trees);
    }
    if (doc.contains("gate")) {
        const json& g = doc["gate"];
        get_if_present(g, "epsilon_fraction", c.epsilon_fraction);
        get_if_present(g, "accuracy_gate", c.accuracy_gate);
        get_if_present(g, "min_train_rows", c.min_train_rows);
        get_if_present(g, "tune_below_rows", c.tune_below_rows);
        get_if_present(g, "audit_fraction", c.audit_fraction);
    }
    if (doc.contains("cost_model")) {
        const json& m = doc["cost_model"];
        get_if_present(m, "tack_penalty_s", c.cost_model.tack_penalty_s);
        get_if_present(m, "gybe_penalty_s", c.cost_model.gybe_penalty_s);
        get_if_present(m, "bow_up_penalty_s", c.cost_model.bow_up_penalty_s);
        get_if_present(m, "bow_down_penalty_s", c.cost_model.bow_down_penalty_s);
        get_if_present(m, "upwind_mode_threshold_deg", c.cost_model.upwind_mode_threshold_deg);
    }

    if (c.scenarios.training_count < 1) throw InvalidError("need at least one training scenario");
    if (c.scenarios.holdout_count < 0) throw InvalidError("holdout count must be >= 0");
    if (c.evo.population_size < 2) throw InvalidError("population size must be >= 2");
    if (c.evo.length_min < 1 || c.evo.length_min > c.evo.length_max)
        throw InvalidError("chromosome length bounds must satisfy 1 <= min <= max");
    if (c.shards < 1) throw InvalidError("shards must be >= 1");
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return load_config(in);
}

void save_config_file(const ExperimentConfig& c, const std::string& path) {
    json doc;
    doc["version"] = 1;
    doc["court"] = c.court_path;
    doc["polar"] = c.polar_path;
    doc["out_dir"] = c.out_dir;
    doc["seed"] = c.master_seed;
    doc["shards"] = c.shards;
    doc["surrogate"] = c.surrogate;
    doc["scenarios"] = {
        {"training_count", c.scenarios.training_count},
        {"holdout_count", c.scenarios.holdout_count},
        {"steps", c.scenarios.steps},
        {"initial",
         {{"mean_angle_deg", c.scenarios.initial.mean_angle_deg},
          {"std_angle_deg", c.scenarios.initial.std_angle_deg},
          {"mean_speed_mps", c.scenarios.initial.mean_speed_mps},
          {"std_speed_mps", c.scenarios.initial.std_speed_mps},
          {"west_east_speed_slope", c.scenarios.initial.west_east_speed_slope},
          {"west_angle_perp_bias_deg", c.scenarios.initial.west_angle_perp_bias_deg}}},
        {"perturb",
         {{"sigma_speed_mps", c.scenarios.perturb.sigma_speed_mps},
          {"sigma_angle_deg", c.scenarios.perturb.sigma_angle_deg},
          {"seed_cell_fraction", c.scenarios.perturb.seed_cell_fraction},
          {"spread_decay", c.scenarios.perturb.spread_decay}}},
        {"gusts",
         {{"mean_inter_gust_s", c.scenarios.gusts.mean_inter_gust_s},
          {"mean_length_s", c.scenarios.gusts.mean_length_s},
          {"std_length_s", c.scenarios.gusts.std_length_s},
          {"mean_angle_delta_deg", c.scenarios.gusts.mean_angle_delta_deg},
          {"std_angle_delta_deg", c.scenarios.gusts.std_angle_delta_deg},
          {"mean_speed_delta_mps", c.scenarios.gusts.mean_speed_delta_mps},
          {"std_speed_delta_mps", c.scenarios.gusts.std_speed_delta_mps}}}};
    doc["evo"] = {{"population_size", c.evo.population_size},
                  {"generations", c.evo.generations},
                  {"length_min", c.evo.length_min},
                  {"length_max", c.evo.length_max},
                  {"crossover_rate", c.evo.crossover_rate},
                  {"mutation_rate", c.evo.mutation_rate},
                  {"family_cap", c.evo.family_cap},
                  {"elitism_count", c.evo.elitism_count},
                  {"mutation_radius_cells", c.evo.mutation_radius_cells}};
    doc["gbdt"] = {{"num_leaves", c.gbdt.num_leaves},
                   {"min_data_in_leaf", c.gbdt.min_data_in_leaf},
                   {"lambda_l1", c.gbdt.lambda_l1},
                   {"lambda_l2", c.gbdt.lambda_l2},
                   {"learning_rate", c.gbdt.learning_rate},
                   {"n_trees", c.gbdt.n_trees}};
    doc["gate"] = {{"epsilon_fraction", c.epsilon_fraction},
                   {"accuracy_gate", c.accuracy_gate},
                   {"min_train_rows", c.min_train_rows},
                   {"tune_below_rows", c.tune_below_rows},
                   {"audit_fraction", c.audit_fraction}};
    doc["cost_model"] = {{"tack_penalty_s", c.cost_model.tack_penalty_s},
                         {"gybe_penalty_s", c.cost_model.gybe_penalty_s},
                         {"bow_up_penalty_s", c.cost_model.bow_up_penalty_s},
                         {"bow_down_penalty_s", c.cost_model.bow_down_penalty_s},
                         {"upwind_mode_threshold_deg", c.cost_model.upwind_mode_threshold_deg}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path);
    out << doc.dump(2) << '\n';
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for checksum: " + path);
    std::uint64_t hash = 0xCBF29CE484222325ull;
    char buffer[4096];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001B3ull;
        }
        if (!in) break;
    }
    return hash;
}

namespace {

std::string scenario_name(bool holdout, int index) {
    std::ostringstream name;
    name << (holdout ? "holdout_" : "train_") << std::setw(3) << std::setfill('0') << index
         << ".wsc";
    return name.str();
}

std::string scenario_dir(const ExperimentConfig& c) { return c.out_dir + "/scenarios"; }

PolarTable polar_for(const ExperimentConfig& c) {
    return c.polar_path.empty() ? default_polar() : load_polar_file(c.polar_path);
}

std::vector<Scenario> read_scenarios(const ExperimentConfig& c, bool holdout) {
    int count = holdout ? c.scenarios.holdout_count : c.scenarios.training_count;
    std::vector<Scenario> scenarios;
    for (int i = 0; i < count; ++i)
        scenarios.push_back(
            read_scenario_file(scenario_dir(c) + "/" + scenario_name(holdout, i)));
    return scenarios;
}

std::string format_cost(double v) {
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

}  // namespace

GenScenariosResult cmd_gen_scenarios(const ExperimentConfig& config) {
    CourtSpec court = load_court_file(config.court_path);
    fs::create_directories(scenario_dir(config));

    GenScenariosResult result;
    json manifest;
    manifest["court"] = config.court_path;
    manifest["seed"] = config.master_seed;
    auto generate = [&](bool holdout, int count) {
        std::uint64_t init_stream = holdout ? kSeedHoldoutInit : kSeedScenarioInit;
        std::uint64_t sim_stream = holdout ? kSeedHoldoutSim : kSeedScenarioSim;
        for (int i = 0; i < count; ++i) {
            WindField initial =
                gen_initial_state(court, config.scenarios.initial,
                                  derive_seed(config.master_seed, init_stream, i));
            Scenario scenario = simulate_scenario(
                court, initial, config.scenarios.steps, config.scenarios.perturb,
                config.scenarios.gusts, derive_seed(config.master_seed, sim_stream, i));
            std::string path = scenario_dir(config) + "/" + scenario_name(holdout, i);
            write_scenario_file(scenario, path);
            json entry = {{"file", scenario_name(holdout, i)},
                          {"checksum", fnv1a64_file(path)}};
            manifest[holdout ? "holdout" : "training"].push_back(entry);
            (holdout ? result.holdout_files : result.training_files).push_back(path);
        }
    };
    generate(false, config.scenarios.training_count);
    generate(true, config.scenarios.holdout_count);

    result.manifest_path = scenario_dir(config) + "/manifest.json";
    std::ofstream out(result.manifest_path);
    if (!out) throw IoError("cannot write manifest: " + result.manifest_path);
    out << manifest.dump(2) << '\n';
    return result;
}

SolveExactResult cmd_solve_exact(const ExperimentConfig& config) {
    CourtSpec court = load_court_file(config.court_path);
    PolarTable polar = polar_for(config);
    std::string w0_path = scenario_dir(config) + "/" + scenario_name(false, 0);
    Scenario designated = read_scenario_file(w0_path);
    const WindField& w0 = designated.fields.at(0);

    CourtGraph graph = build_graph(court);
    ExactResult exact = exact_min_path(graph, w0, polar, config.cost_model);

    SolveExactResult result;
    result.route = exact.route;
    result.cost_s = exact.cost_s;
    result.route_path = config.out_dir + "/sw0.route";
    write_route_file(exact.route, result.route_path);

    json meta = {{"cost_s", exact.cost_s},
                 {"edges", exact.route.edge_count()},
                 {"length_m", exact.route.total_length_m(court.cell_size_m)}};
    std::ofstream out(config.out_dir + "/sw0.json");
    if (!out) throw IoError("cannot write sw0.json");
    out << meta.dump(2) << '\n';
    return result;
}

Chromosome parse_chromosome_key(const std::string& key) {
    Chromosome ch;
    std::stringstream ss(key);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        if (pair.empty()) continue;
        auto comma = pair.find(',');
        if (comma == std::string::npos) throw ParseError("bad chromosome key: " + key);
        ch.waypoints.push_back(
            {std::stoi(pair.substr(0, comma)), std::stoi(pair.substr(comma + 1))});
    }
    return ch;
}

void write_population_file(const std::vector<Individual>& pop, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write population file: " + path);
    for (const Individual& ind : pop) {
        const char* state = ind.evaluated == EvalState::true_eval ? "true_eval"
                            : ind.evaluated == EvalState::forecast ? "forecast"
                                                                   : "unevaluated";
        out << cache_key(ind.chromosome) << '|'
            << (ind.fitness ? format_cost(*ind.fitness) : "-") << '|'
            << (ind.aggregate_cost ? format_cost(*ind.aggregate_cost) : "-") << '|' << state
            << '\n';
    }
}

namespace {

struct RunArtifacts {
    CourtSpec court;
    PolarTable polar;
    std::vector<Scenario> training;
    Route s_w0;
    double s_w0_static_cost = 0.0;
    double base_cost_normalized = 0.0;  // s_w0 aggregate over training, per scenario
};

RunArtifacts load_run_artifacts(const ExperimentConfig& config) {
    RunArtifacts art;
    art.court = load_court_file(config.court_path);
    art.polar = polar_for(config);
    art.training = read_scenarios(config, false);
    if (art.training.empty()) throw InvalidError("no training scenarios found; run gen-scenarios");

    art.s_w0 = read_route_file(config.out_dir + "/sw0.route", art.court);
    auto static_cost = route_cost_static(art.s_w0, art.training[0].fields.at(0), art.court,
                                         art.polar, config.cost_model);
    if (!static_cost) throw InvalidError("s_w0 route infeasible under W_0");
    art.s_w0_static_cost = *static_cost;

    double p_inf = 10.0 * art.s_w0_static_cost;
    std::vector<Route> family{art.s_w0};
    double aggregate = 0.0;
    for (const Scenario& s : art.training)
        aggregate += family_cost_on_scenario(family, s, art.court, art.polar, config.cost_model,
                                             p_inf);
    art.base_cost_normalized = aggregate / static_cast<double>(art.training.size());
    return art;
}

}  // namespace

EvolveResult cmd_evolve(const ExperimentConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    RunArtifacts art = load_run_artifacts(config);
    fs::create_directories(config.out_dir);

    EvoParams params = config.evo;
    params.seed = config.master_seed;
    params.infeasible_penalty = 10.0 * art.s_w0_static_cost;
    params.fitness_offset_m =
        2.0 * static_cast<double>(art.training.size()) * params.infeasible_penalty;

    SegmentSolver solver(art.court, art.polar, config.cost_model,
                         art.training[0].fields.at(0));
    EvoContext ctx{art.court, art.polar, config.cost_model, params, solver};
    FitnessCache cache;
    EvalPlan plan = EvalPlan::make(static_cast<int>(art.training.size()), config.shards);

    std::optional<SurrogateState> surrogate;
    GateFn gate;
    if (config.surrogate) {
        FeatureEncoding enc{art.court.width_cells, art.court.height_cells, params.length_max};
        GateConfig gate_config;
        gate_config.base_cost = art.base_cost_normalized;
        gate_config.epsilon = config.epsilon_fraction * art.base_cost_normalized;
        gate_config.accuracy_gate = config.accuracy_gate;
        gate_config.min_train_rows = config.min_train_rows;
        gate_config.tune_below_rows = config.tune_below_rows;
        gate_config.audit_fraction = config.audit_fraction;
        surrogate.emplace(enc, gate_config, config.gbdt,
                          static_cast<int>(art.training.size()),
                          derive_seed(config.master_seed, kSeedSurrogate));
        gate = [&s = *surrogate](const Chromosome& ch) { return s.gate_or_forecast(ch); };
    }

    std::ofstream log(config.out_dir + "/evolution_log.csv");
    if (!log) throw IoError("cannot write evolution log");
    log << "gen,best_cost,mean_cost,cache_hits,true_evals,forecasts\n";
    std::ofstream surrogate_log;
    if (config.surrogate) {
        surrogate_log.open(config.out_dir + "/surrogate_log.csv");
        surrogate_log << "gen,rows,holdout_accuracy,active,gated_out,forecasts\n";
    }

    EvolveResult result;
    Rng evo_rng(derive_seed(config.master_seed, kSeedEvolution));
    std::vector<Individual> pop = init_population(art.s_w0, ctx, evo_rng);

    auto evaluate = [&](std::vector<Individual>& p) -> EvalStats {
        return evaluate_population(p, art.training, ctx, cache, plan,
                                   config.surrogate ? &gate : nullptr);
    };

    auto end_of_generation = [&](int gen, std::vector<Individual>& p, const EvalStats& stats) {
        double best = std::numeric_limits<double>::infinity();
        double mean = 0.0;
        for (const Individual& ind : p) {
            mean += *ind.aggregate_cost;
            if (ind.evaluated == EvalState::true_eval && *ind.aggregate_cost < best)
                best = *ind.aggregate_cost;
        }
        mean /= static_cast<double>(p.size());
        log << gen << ',' << format_cost(best) << ',' << format_cost(mean) << ','
            << stats.cache_hits << ',' << stats.true_evaluations << ',' << stats.forecasts
            << '\n';
        result.totals += stats;

        if (surrogate) {
            surrogate->ingest_generation(p);
            for (auto& [ch, forecast] : surrogate->take_pending_audits()) {
                FitnessResult truth = fitness(ch, art.training, ctx);
                surrogate->record_audit(forecast,
                                        truth.aggregate_cost / art.training.size());
            }
            bool was_active = surrogate->active();
            surrogate->retrain();
            if (result.activation_generation < 0 && !was_active && surrogate->active())
                result.activation_generation = gen + 1;  // gates from the next generation on
            surrogate_log << gen << ',' << surrogate->row_count() << ','
                          << surrogate->last_holdout_accuracy() << ','
                          << (surrogate->active() ? 1 : 0) << ',' << surrogate->gated_out()
                          << ',' << surrogate->forecast_count() << '\n';
        }
    };

    EvalStats init_stats = evaluate(pop);
    end_of_generation(0, pop, init_stats);

    for (int gen = 1; gen <= params.generations; ++gen) {
        EvalStats stats;
        auto evaluator = [&](std::vector<Individual>& p) { stats = evaluate(p); };
        pop = step_generation(pop, ctx, evaluator, evo_rng);
        end_of_generation(gen, pop, stats);
    }
    result.generations = params.generations;

    write_population_file(pop, config.out_dir + "/population.txt");

    // Cache dump and top solutions. The cache's iteration order is
    // unspecified, so both outputs are sorted before writing.
    double scale = 1.0 / static_cast<double>(art.training.size());
    std::vector<std::pair<std::string, double>> entries;  // (key, aggregate)
    for (const auto& [key, entry] : cache.entries()) entries.emplace_back(key, entry.aggregate_cost);
    std::sort(entries.begin(), entries.end());
    {
        std::ofstream dump(config.out_dir + "/cache_dump.csv");
        if (!dump) throw IoError("cannot write cache dump");
        dump << "key,cost\n";
        for (const auto& [key, aggregate] : entries)
            dump << key << ',' << format_cost(aggregate * scale) << '\n';
    }

    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    {
        std::ofstream top(config.out_dir + "/top_solutions.txt");
        if (!top) throw IoError("cannot write top solutions");
        for (size_t i = 0; i < entries.size() && i < 10; ++i) {
            top << entries[i].first << '|' << format_cost(entries[i].second) << '\n';
            result.top.push_back({parse_chromosome_key(entries[i].first), entries[i].second});
        }
    }
    result.best_aggregate = entries.empty() ? 0.0 : entries.front().second;
    result.cache_lookups = cache.lookups();
    result.cache_hits = cache.hits();
    result.log_path = config.out_dir + "/evolution_log.csv";
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

HoldoutReport cmd_holdout_eval(const ExperimentConfig& config) {
    RunArtifacts art = load_run_artifacts(config);
    std::vector<Scenario> holdout = read_scenarios(config, true);
    if (holdout.empty()) throw InvalidError("no holdout scenarios found; run gen-scenarios");

    // Top solutions from the evolve run.
    std::vector<TopSolution> top;
    {
        std::ifstream in(config.out_dir + "/top_solutions.txt");
        if (!in) throw IoError("cannot open top_solutions.txt; run evolve first");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto bar = line.find('|');
            if (bar == std::string::npos) throw ParseError("bad top solution line: " + line);
            top.push_back({parse_chromosome_key(line.substr(0, bar)),
                           std::stod(line.substr(bar + 1))});
        }
    }
    if (top.empty()) throw InvalidError("top solution list is empty");

    double p_inf = 10.0 * art.s_w0_static_cost;
    EvoParams params = config.evo;
    params.infeasible_penalty = p_inf;
    params.fitness_offset_m = 1.0;  // not used for holdout sweeps
    SegmentSolver solver(art.court, art.polar, config.cost_model,
                         art.training[0].fields.at(0));
    EvoContext ctx{art.court, art.polar, config.cost_model, params, solver};

    HoldoutReport report;
    report.scenario_count = static_cast<int>(holdout.size());
    report.report_path = config.out_dir + "/holdout_report.csv";
    std::ofstream out(report.report_path);
    if (!out) throw IoError("cannot write holdout report");
    out << "solution,scenario,cost_s\n";

    auto sweep = [&](const std::string& name, const std::vector<Route>& family,
                     std::vector<double>& row_costs) {
        for (size_t s = 0; s < holdout.size(); ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (const Route& route : family) {
                auto c = route_cost(route, holdout[s], art.court, art.polar, config.cost_model);
                if (c && *c < best) best = *c;
            }
            if (best == std::numeric_limits<double>::infinity()) {
                out << name << ',' << s << ",inf\n";
                row_costs.push_back(p_inf);
            } else {
                out << name << ',' << s << ',' << format_cost(best) << '\n';
                row_costs.push_back(best);
            }
            ++report.row_count;
        }
    };

    std::vector<double> sw0_costs;
    sweep("sw0", {art.s_w0}, sw0_costs);
    report.mean_costs.push_back(std::accumulate(sw0_costs.begin(), sw0_costs.end(), 0.0) /
                                static_cast<double>(sw0_costs.size()));

    for (size_t i = 0; i < top.size(); ++i) {
        std::vector<Route> family = develop(top[i].chromosome, ctx);
        std::vector<double> costs;
        sweep("ea_" + std::to_string(i + 1), family, costs);
        report.mean_costs.push_back(std::accumulate(costs.begin(), costs.end(), 0.0) /
                                    static_cast<double>(costs.size()));
        int wins = 0;
        for (size_t s = 0; s < costs.size(); ++s)
            if (costs[s] < sw0_costs[s]) ++wins;
        report.wins.push_back(wins);
    }
    return report;
}

BenchReport cmd_bench(const ExperimentConfig& config) {
    ExperimentConfig ungated = config;
    ungated.surrogate = false;
    ungated.out_dir = config.out_dir + "/bench_ungated";
    ExperimentConfig gated = config;
    gated.surrogate = true;
    gated.out_dir = config.out_dir + "/bench_gated";

    // Both runs share the scenario files and s_w0 of the parent out_dir.
    for (ExperimentConfig* run : {&ungated, &gated}) {
        fs::create_directories(scenario_dir(*run));
        for (const auto& entry : fs::directory_iterator(scenario_dir(config)))
            fs::copy(entry.path(), scenario_dir(*run) + "/" + entry.path().filename().string(),
                     fs::copy_options::overwrite_existing);
        fs::copy(config.out_dir + "/sw0.route", run->out_dir + "/sw0.route",
                 fs::copy_options::overwrite_existing);
    }

    EvolveResult off = cmd_evolve(ungated);
    EvolveResult on = cmd_evolve(gated);

    BenchReport report;
    report.ungated_s = off.wall_time_s;
    report.gated_s = on.wall_time_s;
    report.speedup = on.wall_time_s > 0 ? off.wall_time_s / on.wall_time_s : 0.0;
    report.ungated_best = off.best_aggregate;
    report.gated_best = on.best_aggregate;
    report.cost_delta_pct =
        off.best_aggregate != 0
            ? 100.0 * (on.best_aggregate - off.best_aggregate) / off.best_aggregate
            : 0.0;
    report.gated_forecasts = on.totals.forecasts;
    report.ungated_cache_hits = off.cache_hits;
    report.gated_cache_hits = on.cache_hits;

    report.report_path = config.out_dir + "/bench_report.json";
    json doc = {{"ungated_s", report.ungated_s},
                {"gated_s", report.gated_s},
                {"speedup", report.speedup},
                {"ungated_best", report.ungated_best},
                {"gated_best", report.gated_best},
                {"cost_delta_pct", report.cost_delta_pct},
                {"gated_forecasts", report.gated_forecasts},
                {"ungated_cache_hits", report.ungated_cache_hits},
                {"gated_cache_hits", report.gated_cache_hits}};
    std::ofstream out(report.report_path);
    if (!out) throw IoError("cannot write bench report");
    out << doc.dump(2) << '\n';
    return report;
}

TrainOfflineResult cmd_train_offline(const ExperimentConfig& config,
                                     const std::string& dump_path) {
    RunArtifacts art = load_run_artifacts(config);
    std::string path = dump_path.empty() ? config.out_dir + "/cache_dump.csv" : dump_path;

    gbdt::Dataset rows;
    FeatureEncoding enc{art.court.width_cells, art.court.height_cells, config.evo.length_max};
    {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open cache dump: " + path);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto comma = line.rfind(',');
            if (comma == std::string::npos) throw ParseError("bad cache dump line: " + line);
            Chromosome ch = parse_chromosome_key(line.substr(0, comma));
            rows.features.push_back(featurize(ch, enc));
            rows.targets.push_back(std::stod(line.substr(comma + 1)));
        }
    }

    GateConfig gate;
    gate.base_cost = art.base_cost_normalized;
    gate.epsilon = config.epsilon_fraction * art.base_cost_normalized;

    TrainOfflineResult result{
        offline_study(rows, gate, config.gbdt, 0.01,
                      derive_seed(config.master_seed, kSeedSurrogate)),
        config.out_dir + "/offline_metrics.csv"};

    gbdt::save_model_file(result.study.classifier, config.out_dir + "/classifier.json");
    gbdt::save_model_file(result.study.regressor, config.out_dir + "/regressor.json");

    std::ofstream out(result.metrics_path);
    if (!out) throw IoError("cannot write offline metrics");
    const auto& c = result.study.confusion;
    out << "metric,value\n";
    out << "rows," << rows.n_rows() << '\n';
    out << "train_rows," << result.study.train_rows << '\n';
    out << "holdout_rows," << result.study.holdout_rows << '\n';
    out << "accuracy," << (c.accuracy ? format_cost(*c.accuracy) : "undefined") << '\n';
    out << "precision," << (c.precision ? format_cost(*c.precision) : "undefined") << '\n';
    out << "recall," << (c.recall ? format_cost(*c.recall) : "undefined") << '\n';
    out << "sensitivity," << (c.sensitivity ? format_cost(*c.sensitivity) : "undefined") << '\n';
    out << "mse," << format_cost(result.study.regression.mse) << '\n';
    out << "rmse," << format_cost(result.study.regression.rmse) << '\n';
    out << "mae," << format_cost(result.study.regression.mae) << '\n';
    out << "mean_cost," << format_cost(result.study.mean_cost) << '\n';
    out << "within_1pct," << format_cost(result.study.within_band_fraction) << '\n';
    return result;
}

}  // namespace regatta
