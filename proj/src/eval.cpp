#include "regatta/eval.hpp"

#include <chrono>
#include <ostream>
#include <thread>

namespace regatta {

std::string cache_key(const Chromosome& ch) {
    std::string key;
    key.reserve(ch.waypoints.size() * 8);
    for (const Cell& c : ch.waypoints) {
        key += std::to_string(c.x);
        key += ',';
        key += std::to_string(c.y);
        key += ';';
    }
    return key;
}

const FitnessCache::Entry* FitnessCache::lookup(const std::string& key) {
    ++lookups_;
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    ++hits_;
    return &it->second;
}

void FitnessCache::insert(const std::string& key, Entry entry) { map_.emplace(key, entry); }

EvalPlan EvalPlan::make(int scenario_count, int shard_count) {
    if (shard_count < 1) throw InvalidError("shard count must be >= 1");
    EvalPlan plan;
    plan.shards.resize(static_cast<size_t>(shard_count));
    int base = scenario_count / shard_count;
    int extra = scenario_count % shard_count;
    int next = 0;
    for (int w = 0; w < shard_count; ++w) {
        int size = base + (w < extra ? 1 : 0);
        for (int k = 0; k < size; ++k) plan.shards[static_cast<size_t>(w)].push_back(next++);
    }
    return plan;
}

EvalStats& EvalStats::operator+=(const EvalStats& other) {
    true_evaluations += other.true_evaluations;
    cache_hits += other.cache_hits;
    forecasts += other.forecasts;
    wall_time_s += other.wall_time_s;
    return *this;
}

namespace {

// Runs fn(0..n) across the worker count, chunked contiguously. Each index is
// touched by exactly one worker and writes only its own slots.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int used = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(used));
    for (int w = 0; w < used; ++w) {
        int lo = static_cast<int>(static_cast<long>(n) * w / used);
        int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / used);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

EvalStats evaluate_population(std::vector<Individual>& pop,
                              const std::vector<Scenario>& scenarios, EvoContext& ctx,
                              FitnessCache& cache, const EvalPlan& plan, const GateFn* gate) {
    auto t0 = std::chrono::steady_clock::now();
    EvalStats stats;

    std::vector<int> work;  // indices needing a true evaluation
    std::vector<std::pair<int, std::string>> deferred;  // duplicates within this batch
    std::unordered_map<std::string, int> in_flight;     // key -> first individual index
    for (size_t i = 0; i < pop.size(); ++i) {
        Individual& ind = pop[i];
        if (ind.evaluated != EvalState::unevaluated) continue;
        std::string key = cache_key(ind.chromosome);
        if (const FitnessCache::Entry* hit = cache.lookup(key)) {
            ind.fitness = hit->fitness;
            ind.aggregate_cost = hit->aggregate_cost;
            ind.evaluated = EvalState::true_eval;
            ++stats.cache_hits;
            continue;
        }
        if (auto dup = in_flight.find(key); dup != in_flight.end()) {
            deferred.emplace_back(static_cast<int>(i), key);
            continue;
        }
        if (gate) {
            if (auto forecast = (*gate)(ind.chromosome)) {
                ind.aggregate_cost = *forecast;
                ind.fitness = ctx.params.fitness_offset_m - *forecast;
                ind.evaluated = EvalState::forecast;
                ++stats.forecasts;
                in_flight.emplace(std::move(key), static_cast<int>(i));
                continue;
            }
        }
        in_flight.emplace(std::move(key), static_cast<int>(i));
        work.push_back(static_cast<int>(i));
    }

    int workers = plan.shard_count();

    std::vector<std::vector<Route>> families(work.size());
    parallel_for(static_cast<int>(work.size()), workers, [&](int w) {
        families[static_cast<size_t>(w)] =
            develop(pop[static_cast<size_t>(work[static_cast<size_t>(w)])].chromosome, ctx);
    });

    // Shard sweep: slot (w, s) is written by exactly one worker; the sum over
    // s below runs in scenario order, so totals are independent of W.
    std::vector<std::vector<double>> per_scenario(
        work.size(), std::vector<double>(scenarios.size(), 0.0));
    parallel_for(workers, workers, [&](int shard) {
        for (int s : plan.shards[static_cast<size_t>(shard)]) {
            for (size_t w = 0; w < work.size(); ++w) {
                per_scenario[w][static_cast<size_t>(s)] = family_cost_on_scenario(
                    families[w], scenarios[static_cast<size_t>(s)], ctx.court, ctx.polar,
                    ctx.cost_model, ctx.params.infeasible_penalty);
            }
        }
    });

    for (size_t w = 0; w < work.size(); ++w) {
        double aggregate = 0.0;
        for (double c : per_scenario[w]) aggregate += c;
        double fit = ctx.params.fitness_offset_m - aggregate;
        if (fit <= 0) throw InvalidError("fitness offset M is too small for this instance");
        Individual& ind = pop[static_cast<size_t>(work[w])];
        ind.fitness = fit;
        ind.aggregate_cost = aggregate;
        ind.evaluated = EvalState::true_eval;
        cache.insert(cache_key(ind.chromosome), {fit, aggregate});
        ++stats.true_evaluations;
    }

    for (const auto& [idx, key] : deferred) {
        Individual& ind = pop[static_cast<size_t>(idx)];
        if (const FitnessCache::Entry* hit = cache.lookup(key)) {
            ind.fitness = hit->fitness;
            ind.aggregate_cost = hit->aggregate_cost;
            ind.evaluated = EvalState::true_eval;
            ++stats.cache_hits;
        } else {
            // First instance was gated out; reuse its forecast.
            const Individual& first = pop[static_cast<size_t>(in_flight.at(key))];
            ind.fitness = first.fitness;
            ind.aggregate_cost = first.aggregate_cost;
            ind.evaluated = EvalState::forecast;
            ++stats.forecasts;
        }
    }

    stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

}  // namespace regatta
