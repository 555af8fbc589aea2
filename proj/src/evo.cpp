#include "regatta/evo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace regatta {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SegmentSolver::SegmentSolver(const CourtSpec& court, const PolarTable& polar,
                             const EdgeCostModel& m, WindField pricing_field)
    : court_(court), polar_(polar), model_(m), field_(std::move(pricing_field)) {}

std::shared_ptr<const SegmentSolver::Solution> SegmentSolver::solve(Cell from, Cell to) {
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find({from, to});
        if (it != cache_.end()) return it->second;
    }
    auto solution = compute(from, to);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.emplace(std::pair{from, to}, solution);
    return it->second;  // first writer wins; the computation is deterministic anyway
}

std::shared_ptr<const SegmentSolver::Solution> SegmentSolver::compute(Cell from, Cell to) const {
    auto solution = std::make_shared<Solution>();
    for (int i = 0; i < 2; ++i)
        for (int o = 0; o < 2; ++o) solution->cost[i][o] = kInf;

    if (from == to) {
        for (int m = 0; m < 2; ++m) {
            solution->cost[m][m] = 0.0;
            solution->route[m][m].steps = {{from, static_cast<SailingMode>(m)}};
        }
        return solution;
    }

    CourtGraph graph;
    try {
        graph = build_graph(court_, from, to);
    } catch (const InfeasibleError&) {
        return solution;
    }
    for (int in_mode = 0; in_mode < 2; ++in_mode) {
        int start_id = graph.find_vertex(from, static_cast<SailingMode>(in_mode));
        if (start_id < 0) continue;
        DagCosts costs = relax_dag(graph, field_, polar_, model_, {start_id});
        for (int out_mode = 0; out_mode < 2; ++out_mode) {
            int goal_id = graph.find_vertex(to, static_cast<SailingMode>(out_mode));
            if (goal_id < 0) continue;
            double c = costs.cost[static_cast<size_t>(goal_id)];
            if (c == kInf) continue;
            solution->cost[in_mode][out_mode] = c;
            solution->route[in_mode][out_mode] = extract_route(graph, costs, goal_id);
        }
    }
    return solution;
}

namespace {

// A partial composition: accumulated static cost plus the mode chosen at
// every anchor so far. Mode sequences give the deterministic tie order.
struct Partial {
    double cost;
    std::vector<int> modes;

    bool operator<(const Partial& other) const {
        if (cost != other.cost) return cost < other.cost;
        return modes < other.modes;
    }
};

}  // namespace

std::vector<Route> develop(const Chromosome& ch, EvoContext& ctx) {
    std::vector<Cell> anchors;
    anchors.push_back(ctx.court.start_cell);
    anchors.insert(anchors.end(), ch.waypoints.begin(), ch.waypoints.end());
    anchors.push_back(ctx.court.goal_cell);

    std::vector<std::shared_ptr<const SegmentSolver::Solution>> segments;
    for (size_t i = 0; i + 1 < anchors.size(); ++i)
        segments.push_back(ctx.solver.solve(anchors[i], anchors[i + 1]));

    const int K = std::max(1, ctx.params.family_cap);

    // Beam over junction modes: keep the K best partials per current mode.
    std::vector<Partial> by_mode[2];
    by_mode[0].push_back({0.0, {0}});
    by_mode[1].push_back({0.0, {1}});
    for (const auto& segment : segments) {
        std::vector<Partial> next[2];
        for (int in_mode = 0; in_mode < 2; ++in_mode) {
            for (const Partial& p : by_mode[in_mode]) {
                for (int out_mode = 0; out_mode < 2; ++out_mode) {
                    double c = segment->cost[in_mode][out_mode];
                    if (c == kInf) continue;
                    Partial q{p.cost + c, p.modes};
                    q.modes.push_back(out_mode);
                    next[out_mode].push_back(std::move(q));
                }
            }
        }
        for (int mode = 0; mode < 2; ++mode) {
            std::sort(next[mode].begin(), next[mode].end());
            if (static_cast<int>(next[mode].size()) > K) next[mode].resize(static_cast<size_t>(K));
            by_mode[mode] = std::move(next[mode]);
        }
    }

    std::vector<Partial> finals;
    finals.insert(finals.end(), by_mode[0].begin(), by_mode[0].end());
    finals.insert(finals.end(), by_mode[1].begin(), by_mode[1].end());
    std::sort(finals.begin(), finals.end());
    if (static_cast<int>(finals.size()) > K) finals.resize(static_cast<size_t>(K));

    std::vector<Route> family;
    for (const Partial& p : finals) {
        Route route;
        for (size_t s = 0; s < segments.size(); ++s) {
            const Route& leg = segments[s]->route[p.modes[s]][p.modes[s + 1]];
            size_t skip = route.steps.empty() ? 0 : 1;  // junction vertex is shared
            route.steps.insert(route.steps.end(), leg.steps.begin() + skip, leg.steps.end());
        }
        family.push_back(std::move(route));
    }
    return family;
}

double family_cost_on_scenario(const std::vector<Route>& family, const Scenario& scenario,
                               const CourtSpec& court, const PolarTable& polar,
                               const EdgeCostModel& m, double infeasible_penalty) {
    double best = kInf;
    for (const Route& route : family) {
        auto c = route_cost(route, scenario, court, polar, m);
        if (c && *c < best) best = *c;
    }
    return best == kInf ? infeasible_penalty : best;
}

FitnessResult fitness(const Chromosome& ch, const std::vector<Scenario>& scenarios,
                      EvoContext& ctx) {
    std::vector<Route> family = develop(ch, ctx);
    double aggregate = 0.0;
    for (const Scenario& s : scenarios)
        aggregate += family_cost_on_scenario(family, s, ctx.court, ctx.polar, ctx.cost_model,
                                             ctx.params.infeasible_penalty);
    double fit = ctx.params.fitness_offset_m - aggregate;
    if (fit <= 0)
        throw InvalidError("fitness offset M is too small for this instance");
    return {fit, aggregate};
}

bool chromosome_valid(const Chromosome& ch, const CourtSpec& court, const EvoParams& params) {
    int len = static_cast<int>(ch.waypoints.size());
    if (len < params.length_min || len > params.length_max) return false;
    for (Cell c : ch.waypoints)
        if (!court.is_navigable(c)) return false;
    return true;
}

namespace {

// Evenly spaced subsample of size k (k <= n assumed handled by caller via
// clamping); preserves order, keeps first/last spread across the sequence.
std::vector<Cell> subsample(const std::vector<Cell>& cells, int k) {
    std::vector<Cell> out;
    int n = static_cast<int>(cells.size());
    if (k <= 0 || n == 0) return out;
    if (k >= n) return cells;
    for (int j = 0; j < k; ++j) {
        int idx = k == 1 ? n / 2
                         : static_cast<int>(std::lround(static_cast<double>(j) * (n - 1) / (k - 1)));
        out.push_back(cells[static_cast<size_t>(idx)]);
    }
    return out;
}

std::vector<Cell> interior_cells(const Route& route) {
    std::vector<Cell> cells;
    for (size_t i = 1; i + 1 < route.steps.size(); ++i) cells.push_back(route.steps[i].cell);
    return cells;
}

Chromosome project_route(const Route& route, EvoContext& ctx, Rng& rng) {
    std::vector<Cell> interior = interior_cells(route);
    int target = std::clamp(static_cast<int>(interior.size()), ctx.params.length_min,
                            ctx.params.length_max);
    Chromosome ch{subsample(interior, target)};
    return repair(ch, ctx, rng);
}

}  // namespace

std::vector<Individual> init_population(const Route& s_w0, EvoContext& ctx, Rng& rng) {
    std::vector<Individual> pop;
    pop.push_back({project_route(s_w0, ctx, rng), std::nullopt, std::nullopt,
                   EvalState::unevaluated});

    auto cells = ctx.court.navigable_cells();
    while (static_cast<int>(pop.size()) < ctx.params.population_size) {
        Chromosome ch;
        bool ok = false;
        for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
            int n_via = 1 + static_cast<int>(rng.below(3));
            std::vector<Cell> anchors{ctx.court.start_cell};
            for (int i = 0; i < n_via; ++i)
                anchors.push_back(cells[static_cast<size_t>(rng.below(cells.size()))]);
            anchors.push_back(ctx.court.goal_cell);

            // Chain the per-leg optima; any infeasible leg voids the attempt.
            std::vector<Cell> path;
            int mode = 0;
            bool feasible = true;
            for (size_t i = 0; i + 1 < anchors.size() && feasible; ++i) {
                auto leg = ctx.solver.solve(anchors[i], anchors[i + 1]);
                int best_out = -1;
                for (int out = 0; out < 2; ++out) {
                    if (leg->cost[mode][out] == kInf) continue;
                    if (best_out < 0 || leg->cost[mode][out] < leg->cost[mode][best_out])
                        best_out = out;
                }
                if (best_out < 0) {
                    feasible = false;
                    break;
                }
                const Route& r = leg->route[mode][best_out];
                size_t skip = path.empty() ? 0 : 1;
                for (size_t s = skip; s < r.steps.size(); ++s) path.push_back(r.steps[s].cell);
                mode = best_out;
            }
            if (!feasible || path.size() < 2) continue;

            std::vector<Cell> interior(path.begin() + 1, path.end() - 1);
            int span = ctx.params.length_max - ctx.params.length_min;
            int target = ctx.params.length_min +
                         (span > 0 ? static_cast<int>(rng.below(span + 1)) : 0);
            target = std::clamp(target, 1, std::max(1, static_cast<int>(interior.size())));
            ch.waypoints = subsample(interior, target);
            ok = true;
        }
        if (!ok) ch = pop.front().chromosome;  // degenerate courts fall back to s_w0
        pop.push_back({repair(ch, ctx, rng), std::nullopt, std::nullopt,
                       EvalState::unevaluated});
    }
    pop.resize(static_cast<size_t>(ctx.params.population_size));
    return pop;
}

Chromosome cycle_elimination(const Chromosome& ch) {
    std::vector<Cell> wp = ch.waypoints;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < wp.size() && !changed; ++i) {
            size_t last = i;
            for (size_t j = i + 1; j < wp.size(); ++j)
                if (wp[j] == wp[i]) last = j;
            if (last != i) {
                wp.erase(wp.begin() + static_cast<long>(i) + 1,
                         wp.begin() + static_cast<long>(last) + 1);
                changed = true;
            }
        }
    }
    return {wp};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            EvoContext& ctx, Rng& rng) {
    // Pivot recombination when the parents share a waypoint, one-point
    // crossover with independent cut points otherwise.
    std::vector<Cell> common;
    {
        std::set<Cell> in_b(b.waypoints.begin(), b.waypoints.end());
        std::set<Cell> seen;
        for (Cell c : a.waypoints)
            if (in_b.count(c) && seen.insert(c).second) common.push_back(c);
        std::sort(common.begin(), common.end(), row_major_less);
    }

    std::vector<Cell> c1, c2;
    if (!common.empty()) {
        Cell pivot = common[static_cast<size_t>(rng.below(common.size()))];
        auto ia = std::find(a.waypoints.begin(), a.waypoints.end(), pivot);
        auto ib = std::find(b.waypoints.begin(), b.waypoints.end(), pivot);
        c1.assign(a.waypoints.begin(), ia + 1);
        c1.insert(c1.end(), ib + 1, b.waypoints.end());
        c2.assign(b.waypoints.begin(), ib + 1);
        c2.insert(c2.end(), ia + 1, a.waypoints.end());
        Chromosome child1 = repair(cycle_elimination({c1}), ctx, rng);
        Chromosome child2 = repair(cycle_elimination({c2}), ctx, rng);
        return {child1, child2};
    }

    size_t cut_a = rng.below(a.waypoints.size() + 1);
    size_t cut_b = rng.below(b.waypoints.size() + 1);
    c1.assign(a.waypoints.begin(), a.waypoints.begin() + static_cast<long>(cut_a));
    c1.insert(c1.end(), b.waypoints.begin() + static_cast<long>(cut_b), b.waypoints.end());
    c2.assign(b.waypoints.begin(), b.waypoints.begin() + static_cast<long>(cut_b));
    c2.insert(c2.end(), a.waypoints.begin() + static_cast<long>(cut_a), a.waypoints.end());
    return {repair({c1}, ctx, rng), repair({c2}, ctx, rng)};
}

Chromosome repair(const Chromosome& ch, EvoContext& ctx, Rng& rng) {
    std::vector<Cell> wp;
    for (Cell c : ch.waypoints)
        if (ctx.court.is_navigable(c)) wp.push_back(c);

    while (static_cast<int>(wp.size()) > ctx.params.length_max)
        wp.erase(wp.begin() + static_cast<long>(rng.below(wp.size())));

    int guard = 0;
    while (static_cast<int>(wp.size()) < ctx.params.length_min) {
        if (++guard > 4 * ctx.params.length_min + 16)
            throw InvalidError("repair cannot reach the minimum chromosome length");
        // Split the widest gap between adjacent anchors (start and goal count
        // as anchors) at the navigable cell nearest the geometric midpoint.
        std::vector<Cell> anchors{ctx.court.start_cell};
        anchors.insert(anchors.end(), wp.begin(), wp.end());
        anchors.push_back(ctx.court.goal_cell);
        size_t widest = 0;
        double widest_d2 = -1.0;
        for (size_t i = 0; i + 1 < anchors.size(); ++i) {
            double dx = anchors[i + 1].x - anchors[i].x;
            double dy = anchors[i + 1].y - anchors[i].y;
            double d2 = dx * dx + dy * dy;
            if (d2 > widest_d2) {
                widest_d2 = d2;
                widest = i;
            }
        }
        double mx = (anchors[widest].x + anchors[widest + 1].x) / 2.0;
        double my = (anchors[widest].y + anchors[widest + 1].y) / 2.0;
        Cell nearest;
        double nearest_d2 = kInf;
        for (int y = 0; y < ctx.court.height_cells; ++y) {
            for (int x = 0; x < ctx.court.width_cells; ++x) {
                if (!ctx.court.navigable.at(x, y)) continue;
                double d2 = (x - mx) * (x - mx) + (y - my) * (y - my);
                if (d2 < nearest_d2) {
                    nearest_d2 = d2;
                    nearest = {x, y};
                }
            }
        }
        wp.insert(wp.begin() + static_cast<long>(widest), nearest);
    }
    return {wp};
}

Chromosome mutate(const Chromosome& ch, EvoContext& ctx, Rng& rng) {
    if (ch.waypoints.empty()) return repair(ch, ctx, rng);
    size_t i = rng.below(ch.waypoints.size());
    bool near_start = static_cast<double>(i) < 0.2 * static_cast<double>(ch.waypoints.size());
    Cell center = near_start ? ctx.court.start_cell : ctx.court.goal_cell;

    int radius = ctx.params.mutation_radius_cells > 0
                     ? ctx.params.mutation_radius_cells
                     : (ctx.court.width_cells + 3) / 4;
    std::vector<Cell> candidates;
    for (int y = 0; y < ctx.court.height_cells; ++y) {
        for (int x = 0; x < ctx.court.width_cells; ++x) {
            if (!ctx.court.navigable.at(x, y)) continue;
            double dx = x - center.x, dy = y - center.y;
            if (dx * dx + dy * dy <= static_cast<double>(radius) * radius)
                candidates.push_back({x, y});
        }
    }
    Chromosome out = ch;
    out.waypoints[i] = candidates[static_cast<size_t>(rng.below(candidates.size()))];
    return repair(out, ctx, rng);
}

std::pair<int, int> select_parents(const std::vector<Individual>& pop, Rng& rng) {
    double total = 0.0;
    for (const Individual& ind : pop) {
        if (!ind.fitness || *ind.fitness <= 0)
            throw InvalidError("roulette selection needs positive fitness everywhere");
        total += *ind.fitness;
    }
    auto draw = [&]() {
        double u = rng.next_unit() * total;
        double acc = 0.0;
        for (size_t i = 0; i < pop.size(); ++i) {
            acc += *pop[i].fitness;
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(pop.size()) - 1;
    };
    int first = draw();
    int second = draw();
    return {first, second};
}

std::vector<Individual> step_generation(const std::vector<Individual>& pop, EvoContext& ctx,
                                        const Evaluator& evaluate, Rng& rng) {
    std::vector<int> by_fitness(pop.size());
    for (size_t i = 0; i < pop.size(); ++i) by_fitness[i] = static_cast<int>(i);
    std::stable_sort(by_fitness.begin(), by_fitness.end(), [&](int a, int b) {
        return *pop[static_cast<size_t>(a)].fitness > *pop[static_cast<size_t>(b)].fitness;
    });

    std::vector<Individual> next;
    int elites = std::min<int>(ctx.params.elitism_count, static_cast<int>(pop.size()));
    for (int e = 0; e < elites; ++e) next.push_back(pop[static_cast<size_t>(by_fitness[e])]);

    while (static_cast<int>(next.size()) < ctx.params.population_size) {
        auto [i, j] = select_parents(pop, rng);
        Chromosome c1 = pop[static_cast<size_t>(i)].chromosome;
        Chromosome c2 = pop[static_cast<size_t>(j)].chromosome;
        if (rng.chance(ctx.params.crossover_rate))
            std::tie(c1, c2) = crossover(c1, c2, ctx, rng);
        if (rng.chance(ctx.params.mutation_rate)) c1 = mutate(c1, ctx, rng);
        if (rng.chance(ctx.params.mutation_rate)) c2 = mutate(c2, ctx, rng);
        next.push_back({c1, std::nullopt, std::nullopt, EvalState::unevaluated});
        if (static_cast<int>(next.size()) < ctx.params.population_size)
            next.push_back({c2, std::nullopt, std::nullopt, EvalState::unevaluated});
    }

    evaluate(next);
    return next;
}

}  // namespace regatta
