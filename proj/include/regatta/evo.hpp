#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "regatta/court.hpp"
#include "regatta/graph.hpp"
#include "regatta/rng.hpp"
#include "regatta/windsim.hpp"

namespace regatta {

// Ordered waypoint list between the (implicit) start and goal cells. One
// chromosome develops into a whole family of candidate routes, so an
// individual represents a set of solutions rather than a single one.
struct Chromosome {
    std::vector<Cell> waypoints;

    bool operator==(const Chromosome&) const = default;
};

enum class EvalState : int { unevaluated = 0, true_eval, forecast };

struct Individual {
    Chromosome chromosome;
    std::optional<double> fitness;
    std::optional<double> aggregate_cost;
    EvalState evaluated = EvalState::unevaluated;
};

struct EvoParams {
    int population_size = 100;
    int generations = 100;
    int length_min = 1;
    int length_max = 12;
    double crossover_rate = 0.9;
    double mutation_rate = 0.2;
    double fitness_offset_m = 0.0;   // M; set from the instance at run start
    double infeasible_penalty = 0.0; // per-scenario cost when no route survives
    int family_cap = 8;              // K
    int elitism_count = 2;
    int mutation_radius_cells = 0;   // 0 = ceil(width / 4)
    std::uint64_t seed = 1;
};

// Memoizing per-anchor-pair shortest-segment solver. Each distinct ordered
// cell pair costs one DAG build and two relaxations; results are shared
// across the whole run (and across threads).
class SegmentSolver {
   public:
    struct Solution {
        double cost[2][2];  // [mode at source][mode at target], inf = none
        Route route[2][2];
    };

    SegmentSolver(const CourtSpec& court, const PolarTable& polar, const EdgeCostModel& m,
                  WindField pricing_field);

    std::shared_ptr<const Solution> solve(Cell from, Cell to);

    const CourtSpec& court() const { return court_; }
    const WindField& pricing_field() const { return field_; }

   private:
    std::shared_ptr<const Solution> compute(Cell from, Cell to) const;

    const CourtSpec& court_;
    const PolarTable& polar_;
    const EdgeCostModel& model_;
    WindField field_;
    std::map<std::pair<Cell, Cell>, std::shared_ptr<const Solution>> cache_;
    std::mutex mutex_;
};

// Everything the genetic operators need to know about the instance.
struct EvoContext {
    const CourtSpec& court;
    const PolarTable& polar;
    const EdgeCostModel& cost_model;
    EvoParams params;
    SegmentSolver& solver;
};

// Morphogenesis: develops a chromosome into up to family_cap complete routes
// (cheapest static cost first) by composing per-segment optima over every
// junction-mode choice. Empty when no composition is feasible.
std::vector<Route> develop(const Chromosome& ch, EvoContext& ctx);

// Sum over scenarios of the cheapest family-member cost, with the configured
// penalty for scenarios no family member can sail. The scenario-order sum is
// the one fixed reduction order used everywhere.
double family_cost_on_scenario(const std::vector<Route>& family, const Scenario& scenario,
                               const CourtSpec& court, const PolarTable& polar,
                               const EdgeCostModel& m, double infeasible_penalty);

struct FitnessResult {
    double fitness = 0.0;
    double aggregate_cost = 0.0;
};
FitnessResult fitness(const Chromosome& ch, const std::vector<Scenario>& scenarios,
                      EvoContext& ctx);

std::vector<Individual> init_population(const Route& s_w0, EvoContext& ctx, Rng& rng);

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            EvoContext& ctx, Rng& rng);
Chromosome cycle_elimination(const Chromosome& ch);
Chromosome repair(const Chromosome& ch, EvoContext& ctx, Rng& rng);
Chromosome mutate(const Chromosome& ch, EvoContext& ctx, Rng& rng);

// Roulette selection proportional to fitness. Both picks are independent and
// may coincide. Throws when any fitness is missing or not positive.
std::pair<int, int> select_parents(const std::vector<Individual>& pop, Rng& rng);

// Evaluates every unevaluated individual in place (the eval module supplies
// the parallel, cached implementation).
using Evaluator = std::function<void(std::vector<Individual>&)>;

// One generational step: elites survive, the rest is refilled through
// selection, crossover, mutation, and evaluation of the offspring.
std::vector<Individual> step_generation(const std::vector<Individual>& pop, EvoContext& ctx,
                                        const Evaluator& evaluate, Rng& rng);

// True when all waypoints are in-bounds, navigable, and the length is within
// the configured bounds.
bool chromosome_valid(const Chromosome& ch, const CourtSpec& court, const EvoParams& params);

}  // namespace regatta
