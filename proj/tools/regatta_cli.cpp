// Command-line front end. Talks to the core exclusively through the shared
// library's C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "regatta/c_api.h"

namespace {

struct CommonArgs {
    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int shards = 0;
    std::string surrogate;  // "", "on", "off"
    std::string dump;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_surrogate = false,
                bool with_dump = false) {
    cmd->add_option("--config", args.config, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--seed", args.seed, "master seed override")
        ->each([&](const std::string&) { args.has_seed = true; });
    cmd->add_option("--shards", args.shards, "parallel evaluation shard count");
    if (with_surrogate)
        cmd->add_option("--surrogate", args.surrogate, "on|off")
            ->check(CLI::IsMember({"on", "off"}));
    if (with_dump) cmd->add_option("--dump", args.dump, "cache dump CSV path");
}

regatta_run_options to_options(const CommonArgs& args) {
    regatta_run_options opts;
    regatta_run_options_init(&opts);
    opts.config_path = args.config.c_str();
    if (!args.out_dir.empty()) opts.out_dir = args.out_dir.c_str();
    if (args.has_seed) {
        opts.seed = args.seed;
        opts.has_seed = 1;
    }
    if (args.shards > 0) opts.shards = args.shards;
    if (args.surrogate == "on") opts.surrogate = 1;
    if (args.surrogate == "off") opts.surrogate = 0;
    if (!args.dump.empty()) opts.dump_path = args.dump.c_str();
    return opts;
}

int finish(regatta_status status) {
    if (status == REGATTA_OK) return 0;
    std::fprintf(stderr, "error: %s\n", regatta_last_error());
    return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regatta: robust sailing-route optimization toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", regatta_version());

    CommonArgs gen_args, solve_args, evolve_args, holdout_args, bench_args, offline_args;
    CLI::App* gen = app.add_subcommand("gen-scenarios", "simulate wind scenario files");
    add_common(gen, gen_args);
    CLI::App* solve = app.add_subcommand("solve-exact", "exact optimum for the static W_0");
    add_common(solve, solve_args);
    CLI::App* evolve = app.add_subcommand("evolve", "run the evolutionary search");
    add_common(evolve, evolve_args, /*with_surrogate=*/true);
    CLI::App* holdout = app.add_subcommand("holdout-eval",
                                           "compare s_w0 and the top solutions on held-out "
                                           "scenarios");
    add_common(holdout, holdout_args);
    CLI::App* bench = app.add_subcommand("bench", "time gated vs ungated evolution");
    add_common(bench, bench_args);
    CLI::App* offline = app.add_subcommand("train-offline",
                                           "fit GBDT models from an evolve cache dump");
    add_common(offline, offline_args, /*with_surrogate=*/false, /*with_dump=*/true);

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        auto opts = to_options(gen_args);
        return finish(regatta_cmd_gen_scenarios(&opts));
    }
    if (solve->parsed()) {
        auto opts = to_options(solve_args);
        double cost = 0;
        regatta_status status = regatta_cmd_solve_exact(&opts, &cost);
        if (status == REGATTA_OK) std::printf("s_w0 cost: %.3f s\n", cost);
        return finish(status);
    }
    if (evolve->parsed()) {
        auto opts = to_options(evolve_args);
        double best = 0;
        regatta_status status = regatta_cmd_evolve(&opts, &best);
        if (status == REGATTA_OK) std::printf("best aggregate cost: %.3f\n", best);
        return finish(status);
    }
    if (holdout->parsed()) {
        auto opts = to_options(holdout_args);
        return finish(regatta_cmd_holdout_eval(&opts));
    }
    if (bench->parsed()) {
        auto opts = to_options(bench_args);
        double speedup = 0, delta = 0;
        regatta_status status = regatta_cmd_bench(&opts, &speedup, &delta);
        if (status == REGATTA_OK)
            std::printf("speedup: %.2fx, cost delta: %.3f%%\n", speedup, delta);
        return finish(status);
    }
    if (offline->parsed()) {
        auto opts = to_options(offline_args);
        return finish(regatta_cmd_train_offline(&opts));
    }
    return 1;
}
