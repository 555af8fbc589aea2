#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "regatta/evo.hpp"

namespace regatta {

// Canonical chromosome key: the ordered waypoint list, serialized. Distinct
// lists map to distinct keys; order matters.
std::string cache_key(const Chromosome& ch);

// Run-wide memo of true evaluations. Values are never mutated once stored.
class FitnessCache {
   public:
    struct Entry {
        double fitness = 0.0;
        double aggregate_cost = 0.0;
    };

    const Entry* lookup(const std::string& key);
    void insert(const std::string& key, Entry entry);

    std::uint64_t lookups() const { return lookups_; }
    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return lookups_ - hits_; }
    size_t size() const { return map_.size(); }
    const std::unordered_map<std::string, Entry>& entries() const { return map_; }

   private:
    std::unordered_map<std::string, Entry> map_;
    std::uint64_t lookups_ = 0;
    std::uint64_t hits_ = 0;
};

// Partition of scenario indices into W shards whose sizes differ by at most
// one. Workers sweep shards in parallel; the reduction that follows runs in
// plain scenario order, so results do not depend on W or on scheduling.
struct EvalPlan {
    std::vector<std::vector<int>> shards;

    static EvalPlan make(int scenario_count, int shard_count);
    int shard_count() const { return static_cast<int>(shards.size()); }
};

struct EvalStats {
    std::uint64_t true_evaluations = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t forecasts = 0;
    double wall_time_s = 0.0;

    EvalStats& operator+=(const EvalStats& other);
};

// Optional surrogate hook: returns a forecast aggregate cost to skip the true
// evaluation, or nullopt to let it proceed.
using GateFn = std::function<std::optional<double>(const Chromosome&)>;

// Evaluates every unevaluated individual: cache first, then the gate (when
// provided), then a true evaluation fanned out over the plan's shards.
EvalStats evaluate_population(std::vector<Individual>& pop,
                              const std::vector<Scenario>& scenarios, EvoContext& ctx,
                              FitnessCache& cache, const EvalPlan& plan,
                              const GateFn* gate = nullptr);

}  // namespace regatta
