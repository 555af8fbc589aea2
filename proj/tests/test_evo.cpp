#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "regatta/eval.hpp"
#include "regatta/evo.hpp"
#include "test_util.hpp"

using namespace regatta;

namespace {

struct Instance {
    CourtSpec court;
    PolarTable polar;
    EdgeCostModel cost_model;
    WindField w0;
    SegmentSolver solver;
    EvoParams params;

    Instance(CourtSpec c, PolarTable p, WindField field, EvoParams ep = {})
        : court(std::move(c)),
          polar(std::move(p)),
          w0(std::move(field)),
          solver(court, polar, cost_model, w0),
          params(ep) {}

    EvoContext ctx() { return {court, polar, cost_model, params, solver}; }
};

PolarTable beam_polar(double speed) {
    std::ostringstream csv;
    csv << "angle,4,20\n0,0,0\n30,0,0\n45," << speed << ',' << speed << "\n90," << speed << ','
        << speed << "\n180," << speed << ',' << speed << "\n";
    std::istringstream in(csv.str());
    return load_polar(in);
}

EvoParams loose_params() {
    EvoParams p;
    p.length_min = 1;
    p.length_max = 12;
    p.family_cap = 8;
    p.fitness_offset_m = 1e6;
    p.infeasible_penalty = 1e4;
    return p;
}

double static_route_cost(Instance& inst, const Route& route) {
    auto c = route_cost_static(route, inst.w0, inst.court, inst.polar, inst.cost_model);
    REQUIRE(c.has_value());
    return *c;
}

}  // namespace

TEST_CASE("develop recovers s_w0 when the waypoints lie on it") {
    CourtSpec court = test::open_court(5, 1, {0, 0}, {4, 0});
    Instance inst(court, beam_polar(5.0), test::uniform_field(court, 8.0, 0.0), loose_params());
    EvoContext ctx = inst.ctx();

    CourtGraph graph = build_graph(inst.court);
    ExactResult exact = exact_min_path(graph, inst.w0, inst.polar, inst.cost_model);

    Chromosome ch{{{1, 0}, {2, 0}, {3, 0}}};
    std::vector<Route> family = develop(ch, ctx);
    REQUIRE_FALSE(family.empty());
    CHECK(static_route_cost(inst, family[0]) == doctest::Approx(exact.cost_s));

    // Families come back cheapest-first.
    double last = 0.0;
    for (const Route& route : family) {
        double c = static_route_cost(inst, route);
        CHECK(c >= last);
        last = c;
    }
}

TEST_CASE("a waypoint with no feasible approach develops into an empty family") {
    CourtSpec court = test::make_court({"..#.#", "..###", "....."}, {0, 0}, {4, 2});
    REQUIRE(court.is_navigable({3, 0}));  // present but walled off
    Instance inst(court, beam_polar(5.0), test::uniform_field(court, 8.0, 90.0), loose_params());
    EvoContext ctx = inst.ctx();
    CHECK(develop(Chromosome{{{3, 0}}}, ctx).empty());
}

TEST_CASE("family cap K=1 keeps exactly the single cheapest composition") {
    CourtSpec court = test::open_court(4, 4, {0, 0}, {3, 3});
    EvoParams params = loose_params();
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);

    Chromosome ch{{{1, 1}, {2, 2}}};
    EvoContext ctx8 = inst.ctx();
    std::vector<Route> full = develop(ch, ctx8);
    REQUIRE(!full.empty());

    inst.params.family_cap = 1;
    EvoContext ctx1 = inst.ctx();
    std::vector<Route> capped = develop(ch, ctx1);
    REQUIRE(capped.size() == 1);
    CHECK(capped[0] == full[0]);
}

TEST_CASE("fitness is M minus the aggregate over scenarios") {
    // One 50 m edge at a boat speed that prices the route at 355 s.
    CourtSpec court = test::open_court(2, 1, {0, 0}, {1, 0});
    EvoParams params = loose_params();
    Instance inst(court, beam_polar(50.0 / 355.0), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();

    Chromosome ch{{{1, 0}}};  // waypoint on the goal; start->goal->goal degenerates
    std::vector<Scenario> one{test::static_scenario(inst.w0)};
    FitnessResult r = fitness(ch, one, ctx);
    CHECK(r.aggregate_cost == doctest::Approx(355.0));
    CHECK(r.fitness == doctest::Approx(1e6 - 355.0));
    CHECK(r.fitness == inst.params.fitness_offset_m - r.aggregate_cost);

    std::vector<Scenario> two{one[0], one[0]};
    FitnessResult doubled = fitness(ch, two, ctx);
    CHECK(doubled.aggregate_cost == doctest::Approx(2 * r.aggregate_cost));

    inst.params.fitness_offset_m = 100.0;  // smaller than the aggregate
    EvoContext bad = inst.ctx();
    CHECK_THROWS_AS(fitness(ch, one, bad), InvalidError);
}

TEST_CASE("fitness matches a by-hand min/sum over the developed family") {
    CourtSpec court = test::open_court(4, 3, {0, 0}, {3, 1});
    EvoParams params = loose_params();
    params.family_cap = 3;
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();

    Chromosome ch{{{1, 1}, {2, 1}}};
    std::vector<Route> family = develop(ch, ctx);
    REQUIRE(!family.empty());

    Scenario a = test::static_scenario(test::uniform_field(court, 8.0, 0.0));
    Scenario b = test::static_scenario(test::uniform_field(court, 6.0, 45.0));
    std::vector<Scenario> scenarios{a, b};

    double expected = 0.0;
    for (const Scenario& s : scenarios) {
        double best = std::numeric_limits<double>::infinity();
        for (const Route& route : family) {
            auto c = route_cost(route, s, inst.court, inst.polar, inst.cost_model);
            if (c) best = std::min(best, *c);
        }
        expected += best == std::numeric_limits<double>::infinity()
                        ? inst.params.infeasible_penalty
                        : best;
    }
    FitnessResult r = fitness(ch, scenarios, ctx);
    CHECK(r.aggregate_cost == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("population initialization: projection, validity, determinism") {
    CourtSpec court = test::open_court(8, 8, {0, 0}, {7, 7});
    EvoParams params = loose_params();
    params.population_size = 30;
    params.length_min = 2;
    params.length_max = 6;
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();

    CourtGraph graph = build_graph(inst.court);
    ExactResult exact = exact_min_path(graph, inst.w0, inst.polar, inst.cost_model);

    Rng rng_a(99);
    std::vector<Individual> pop = init_population(exact.route, ctx, rng_a);
    CHECK(static_cast<int>(pop.size()) == 30);
    for (const Individual& ind : pop) {
        CHECK(chromosome_valid(ind.chromosome, inst.court, inst.params));
        CHECK(ind.evaluated == EvalState::unevaluated);
    }
    // Individual 0 is the s_w0 projection: every waypoint sits on the route.
    std::set<std::pair<int, int>> on_route;
    for (const RouteStep& s : exact.route.steps) on_route.insert({s.cell.x, s.cell.y});
    for (const Cell& w : pop[0].chromosome.waypoints)
        CHECK(on_route.count({w.x, w.y}) == 1);

    Rng rng_b(99);
    std::vector<Individual> again = init_population(exact.route, ctx, rng_b);
    for (size_t i = 0; i < pop.size(); ++i)
        CHECK(pop[i].chromosome == again[i].chromosome);

    inst.params.population_size = 1;
    EvoContext solo_ctx = inst.ctx();
    Rng rng_c(99);
    std::vector<Individual> solo = init_population(exact.route, solo_ctx, rng_c);
    CHECK(solo.size() == 1);
    CHECK(solo[0].chromosome == pop[0].chromosome);
}

TEST_CASE("pivot crossover exchanges suffixes at the common waypoint") {
    CourtSpec court = test::open_court(6, 6, {0, 0}, {5, 5});
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), loose_params());
    EvoContext ctx = inst.ctx();
    Rng rng(1);

    Chromosome a{{{1, 1}, {2, 2}, {3, 3}}};  // P Q R
    Chromosome b{{{1, 3}, {2, 2}, {3, 1}}};  // S Q T
    auto [c1, c2] = crossover(a, b, ctx, rng);
    CHECK(c1.waypoints == std::vector<Cell>{{1, 1}, {2, 2}, {3, 1}});  // P Q T
    CHECK(c2.waypoints == std::vector<Cell>{{1, 3}, {2, 2}, {3, 3}});  // S Q R

    auto [d1, d2] = crossover(a, a, ctx, rng);
    CHECK(d1.waypoints == a.waypoints);
    CHECK(d2.waypoints == a.waypoints);
}

TEST_CASE("disjoint-parent crossover repairs children into bounds") {
    CourtSpec court = test::open_court(10, 10, {0, 0}, {9, 9});
    EvoParams params = loose_params();
    params.length_min = 2;
    params.length_max = 7;
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();
    Rng rng(77);

    for (int trial = 0; trial < 1000; ++trial) {
        auto random_chromosome = [&](int x_band) {
            Chromosome ch;
            int len = 2 + static_cast<int>(rng.below(6));
            for (int i = 0; i < len; ++i)
                ch.waypoints.push_back({x_band + static_cast<int>(rng.below(5)),
                                        static_cast<int>(rng.below(10))});
            return ch;
        };
        // Parents drawn from disjoint x bands cannot share a waypoint.
        Chromosome a = random_chromosome(0);
        Chromosome b = random_chromosome(5);
        auto [c1, c2] = crossover(a, b, ctx, rng);
        CHECK(chromosome_valid(c1, inst.court, inst.params));
        CHECK(chromosome_valid(c2, inst.court, inst.params));
    }
}

TEST_CASE("cycle elimination removes repeated-waypoint spans") {
    Chromosome ch{{{1, 1}, {2, 2}, {1, 1}, {3, 3}}};  // P Q P R
    CHECK(cycle_elimination(ch).waypoints == std::vector<Cell>{{1, 1}, {3, 3}});

    Chromosome clean{{{1, 1}, {2, 2}, {3, 3}}};
    CHECK(cycle_elimination(clean).waypoints == clean.waypoints);

    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Cell> wp;
        int len = 1 + static_cast<int>(rng.below(10));
        for (int i = 0; i < len; ++i)
            wp.push_back({static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))});
        Chromosome out = cycle_elimination({wp});
        // All distinct afterwards.
        std::set<std::pair<int, int>> seen;
        for (const Cell& c : out.waypoints) CHECK(seen.insert({c.x, c.y}).second);
        // And a subsequence of the input.
        size_t pos = 0;
        for (const Cell& c : out.waypoints) {
            while (pos < wp.size() && !(wp[pos] == c)) ++pos;
            CHECK(pos < wp.size());
            ++pos;
        }
    }
}

TEST_CASE("repair: identity, trimming, midpoint insertion, blocked-cell drop") {
    CourtSpec court = test::open_court(8, 8, {0, 0}, {7, 7});
    EvoParams params = loose_params();
    params.length_min = 2;
    params.length_max = 5;
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();
    Rng rng(9);

    Chromosome ok{{{2, 2}, {4, 4}, {6, 6}}};
    CHECK(repair(ok, ctx, rng).waypoints == ok.waypoints);

    Chromosome longer{{{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {6, 5}}};  // L_max + 2
    CHECK(static_cast<int>(repair(longer, ctx, rng).waypoints.size()) == 5);

    Chromosome shorter{{{4, 4}}};
    Chromosome grown = repair(shorter, ctx, rng);
    CHECK(static_cast<int>(grown.waypoints.size()) == 2);
    CHECK(std::count(grown.waypoints.begin(), grown.waypoints.end(), Cell{4, 4}) == 1);

    CourtSpec walled = test::make_court({"....", ".#..", "...."}, {0, 0}, {3, 2});
    Instance winst(walled, default_polar(), test::uniform_field(walled, 8.0, 0.0), params);
    EvoContext wctx = winst.ctx();
    Chromosome dirty{{{0, 1}, {1, 1}, {2, 1}}};  // middle waypoint is blocked
    Chromosome cleaned = repair(dirty, wctx, rng);
    CHECK(cleaned.waypoints == std::vector<Cell>{{0, 1}, {2, 1}});
}

TEST_CASE("mutation replaces near start for early loci, near goal for late ones") {
    CourtSpec court = test::open_court(12, 12, {0, 0}, {11, 11});
    EvoParams params = loose_params();
    params.length_min = 1;
    params.length_max = 20;
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();

    Chromosome base;
    for (int i = 1; i <= 10; ++i) base.waypoints.push_back({i, 5});
    const int radius = ctx.params.mutation_radius_cells > 0 ? ctx.params.mutation_radius_cells
                                                            : (12 + 3) / 4;

    int near_start_seen = 0, near_goal_seen = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        Chromosome out = mutate(base, ctx, rng);
        REQUIRE(out.waypoints.size() == base.waypoints.size());
        size_t changed = base.waypoints.size();
        for (size_t i = 0; i < base.waypoints.size(); ++i)
            if (!(out.waypoints[i] == base.waypoints[i])) {
                changed = i;
                break;
            }
        if (changed == base.waypoints.size()) continue;  // replacement equaled the original
        const Cell w = out.waypoints[changed];
        bool first_fifth = static_cast<double>(changed) < 0.2 * 10;
        Cell center = first_fifth ? inst.court.start_cell : inst.court.goal_cell;
        double dx = w.x - center.x, dy = w.y - center.y;
        CHECK(dx * dx + dy * dy <= static_cast<double>(radius) * radius);
        (first_fifth ? near_start_seen : near_goal_seen)++;
    }
    CHECK(near_start_seen > 0);
    CHECK(near_goal_seen > 0);

    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed * 31 + 7);
        CHECK(chromosome_valid(mutate(base, ctx, rng), inst.court, inst.params));
    }
}

TEST_CASE("roulette selection follows fitness proportions") {
    auto individual = [](double fit) {
        Individual ind;
        ind.fitness = fit;
        ind.aggregate_cost = 0.0;
        ind.evaluated = EvalState::true_eval;
        return ind;
    };

    std::vector<Individual> solo{individual(3.0)};
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        auto [a, b] = select_parents(solo, rng);
        CHECK(a == 0);
        CHECK(b == 0);
    }

    std::vector<Individual> equal{individual(2.0), individual(2.0), individual(2.0),
                                  individual(2.0)};
    std::vector<int> counts(4, 0);
    Rng rng2(2);
    const int draws = 100000;
    for (int i = 0; i < draws / 2; ++i) {
        auto [a, b] = select_parents(equal, rng2);
        ++counts[static_cast<size_t>(a)];
        ++counts[static_cast<size_t>(b)];
    }
    for (int c : counts)
        CHECK(std::abs(c / static_cast<double>(draws) - 0.25) < 0.01);

    std::vector<Individual> skewed{individual(3.0), individual(1.0)};
    int first = 0;
    Rng rng3(3);
    for (int i = 0; i < draws / 2; ++i) {
        auto [a, b] = select_parents(skewed, rng3);
        first += (a == 0) + (b == 0);
    }
    CHECK(std::abs(first / static_cast<double>(draws) - 0.75) < 0.01);

    std::vector<Individual> broken{individual(1.0), individual(0.0)};
    Rng rng4(4);
    CHECK_THROWS_AS(select_parents(broken, rng4), InvalidError);
}

TEST_CASE("generational step: elitism bounds and monotone best fitness") {
    CourtSpec court = test::open_court(6, 6, {0, 0}, {5, 5});
    EvoParams params = loose_params();
    params.population_size = 12;
    params.length_min = 1;
    params.length_max = 6;
    params.elitism_count = 2;
    params.crossover_rate = 0.9;
    params.mutation_rate = 0.3;
    Instance inst(court, default_polar(), test::uniform_field(court, 8.0, 0.0), params);
    EvoContext ctx = inst.ctx();

    std::vector<Scenario> scenarios{test::static_scenario(inst.w0),
                                    test::static_scenario(test::uniform_field(court, 6.0, 20.0))};
    Evaluator evaluate = [&](std::vector<Individual>& pop) {
        for (Individual& ind : pop) {
            if (ind.evaluated != EvalState::unevaluated) continue;
            FitnessResult r = fitness(ind.chromosome, scenarios, ctx);
            ind.fitness = r.fitness;
            ind.aggregate_cost = r.aggregate_cost;
            ind.evaluated = EvalState::true_eval;
        }
    };

    CourtGraph graph = build_graph(inst.court);
    ExactResult exact = exact_min_path(graph, inst.w0, inst.polar, inst.cost_model);
    Rng rng(2718);
    std::vector<Individual> pop = init_population(exact.route, ctx, rng);
    evaluate(pop);

    // Degenerate elitism copies the population unchanged.
    {
        EvoParams all_elite = inst.params;
        all_elite.elitism_count = inst.params.population_size;
        Instance inst2(court, default_polar(), test::uniform_field(court, 8.0, 0.0), all_elite);
        EvoContext ctx2 = inst2.ctx();
        Rng rng2(1);
        std::vector<Individual> copy = step_generation(pop, ctx2, evaluate, rng2);
        std::multiset<std::string> before, after;
        for (const Individual& ind : pop) before.insert(cache_key(ind.chromosome));
        for (const Individual& ind : copy) after.insert(cache_key(ind.chromosome));
        CHECK(before == after);
    }

    double best = 0.0;
    for (const Individual& ind : pop) best = std::max(best, *ind.fitness);
    for (int gen = 0; gen < 6; ++gen) {
        pop = step_generation(pop, ctx, evaluate, rng);
        CHECK(static_cast<int>(pop.size()) == inst.params.population_size);
        double now = 0.0;
        for (const Individual& ind : pop) {
            CHECK(chromosome_valid(ind.chromosome, inst.court, inst.params));
            now = std::max(now, *ind.fitness);
        }
        CHECK(now >= best);  // elitism keeps the champion
        best = now;
    }
}
