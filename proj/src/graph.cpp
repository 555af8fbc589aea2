#include "regatta/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace regatta {

const char* to_string(Maneuver m) {
    switch (m) {
        case Maneuver::none: return "none";
        case Maneuver::tack: return "tack";
        case Maneuver::gybe: return "gybe";
        case Maneuver::bow_up: return "bow_up";
        case Maneuver::bow_down: return "bow_down";
    }
    return "?";
}

double EdgeCostModel::penalty(Maneuver m) const {
    switch (m) {
        case Maneuver::none: return 0.0;
        case Maneuver::tack: return tack_penalty_s;
        case Maneuver::gybe: return gybe_penalty_s;
        case Maneuver::bow_up: return bow_up_penalty_s;
        case Maneuver::bow_down: return bow_down_penalty_s;
    }
    return 0.0;
}

int CourtGraph::edge_count() const {
    int n = 0;
    for (const auto& adj : out_edges) n += static_cast<int>(adj.size());
    return n;
}

int CourtGraph::find_vertex(Cell cell, SailingMode mode) const {
    for (int i = 0; i < vertex_count(); ++i)
        if (vertices[i].cell == cell && vertices[i].mode == mode) return i;
    return -1;
}

namespace {

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

double bearing_deg(Cell from, Cell to) {
    // x east, y north; 0 = north, clockwise.
    double dx = to.x - from.x;
    double dy = to.y - from.y;
    return wrap360(std::atan2(dx, dy) * 180.0 / std::numbers::pi);
}

}  // namespace

CourtGraph build_graph(const CourtSpec& court) {
    return build_graph(court, court.start_cell, court.goal_cell);
}

CourtGraph build_graph(const CourtSpec& court, Cell source, Cell target) {
    if (!court.is_navigable(source) || !court.is_navigable(target))
        throw InvalidError("graph endpoints must be navigable");

    CourtGraph graph;
    graph.source_cell = source;
    graph.target_cell = target;
    graph.cell_size_m = court.cell_size_m;

    // Candidate vertices in canonical (y, x, mode) order.
    std::vector<Vertex> all;
    Grid<int> first_id(court.width_cells, court.height_cells, -1);
    for (int y = 0; y < court.height_cells; ++y) {
        for (int x = 0; x < court.width_cells; ++x) {
            if (!court.navigable.at(x, y)) continue;
            first_id.at(x, y) = static_cast<int>(all.size());
            int layer = manhattan({x, y}, target);
            all.push_back({{x, y}, SailingMode::port, layer});
            all.push_back({{x, y}, SailingMode::starboard, layer});
        }
    }

    // Movement edges: 8-neighbors with strictly smaller Manhattan distance
    // to the target; both same-mode and mode-changing moves.
    auto edges_from = [&](int id) {
        std::vector<Edge> adj;
        const Vertex& v = all[static_cast<size_t>(id)];
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                Cell n{v.cell.x + dx, v.cell.y + dy};
                if (!court.is_navigable(n)) continue;
                if (manhattan(n, target) >= v.layer) continue;
                double dist = court.cell_size_m * std::sqrt(double(dx * dx + dy * dy));
                double heading = bearing_deg(v.cell, n);
                int base = first_id.at(n);
                for (int mode = 0; mode < 2; ++mode)
                    adj.push_back({id, base + mode, dist, heading});
            }
        }
        return adj;
    };

    // Reachability both ways, then prune to vertices on some source-target
    // path. Edges already respect the layer rule, so the result is a DAG.
    size_t n = all.size();
    std::vector<char> fwd(n, 0), bwd(n, 0);
    {
        std::vector<int> stack;
        for (int mode = 0; mode < 2; ++mode) {
            int id = first_id.at(source) + mode;
            fwd[static_cast<size_t>(id)] = 1;
            stack.push_back(id);
        }
        while (!stack.empty()) {
            int id = stack.back();
            stack.pop_back();
            for (const Edge& e : edges_from(id)) {
                if (!fwd[static_cast<size_t>(e.to)]) {
                    fwd[static_cast<size_t>(e.to)] = 1;
                    stack.push_back(e.to);
                }
            }
        }
        // Backward pass over reversed edges, seeded at the target.
        std::vector<std::vector<int>> rev(n);
        for (size_t id = 0; id < n; ++id)
            for (const Edge& e : edges_from(static_cast<int>(id))) rev[e.to].push_back(e.from);
        for (int mode = 0; mode < 2; ++mode) {
            int id = first_id.at(target) + mode;
            bwd[static_cast<size_t>(id)] = 1;
            stack.push_back(id);
        }
        while (!stack.empty()) {
            int id = stack.back();
            stack.pop_back();
            for (int p : rev[static_cast<size_t>(id)]) {
                if (!bwd[static_cast<size_t>(p)]) {
                    bwd[static_cast<size_t>(p)] = 1;
                    stack.push_back(p);
                }
            }
        }
    }

    std::vector<int> remap(n, -1);
    for (size_t id = 0; id < n; ++id) {
        if (fwd[id] && bwd[id]) {
            remap[id] = graph.vertex_count();
            graph.vertices.push_back(all[id]);
        }
    }
    if (graph.vertices.empty()) throw InfeasibleError("no route from source to target");

    graph.out_edges.resize(graph.vertices.size());
    for (size_t id = 0; id < n; ++id) {
        if (remap[id] < 0) continue;
        for (Edge e : edges_from(static_cast<int>(id))) {
            if (remap[static_cast<size_t>(e.to)] < 0) continue;
            e.from = remap[id];
            e.to = remap[static_cast<size_t>(e.to)];
            graph.out_edges[static_cast<size_t>(e.from)].push_back(e);
        }
    }

    for (int i = 0; i < graph.vertex_count(); ++i) {
        if (graph.vertices[static_cast<size_t>(i)].cell == source)
            graph.start_vertices.push_back(i);
        if (graph.vertices[static_cast<size_t>(i)].cell == target)
            graph.goal_vertices.push_back(i);
    }
    if (graph.start_vertices.empty() || graph.goal_vertices.empty())
        throw InfeasibleError("no route from source to target");
    return graph;
}

EdgePrice price_move(double heading_deg, double distance_m, SailingMode from_mode,
                     SailingMode to_mode, const WindCellState& wind, const PolarTable& polar,
                     const EdgeCostModel& m) {
    double twa = fold180(heading_deg - wind.angle_deg);
    double speed = polar_speed(polar, twa, wind.speed_mps);
    if (speed <= 0.0) return {};

    // Side the wind comes over for this heading: positive rotation from the
    // heading to the wind source means starboard.
    double rel = angle_diff(heading_deg, wind.angle_deg);
    if (twa < m.upwind_mode_threshold_deg) {
        SailingMode required = rel > 0 ? SailingMode::starboard : SailingMode::port;
        if (to_mode != required) return {};
    }

    Maneuver maneuver = Maneuver::none;
    if (from_mode != to_mode)
        maneuver = twa < 90.0 ? Maneuver::tack : Maneuver::gybe;

    return {true, distance_m / speed + m.penalty(maneuver), maneuver};
}

namespace {

EdgePrice price_edge(const CourtGraph& graph, const Edge& e, const WindCellState& wind,
                     const PolarTable& polar, const EdgeCostModel& m) {
    const Vertex& from = graph.vertices[static_cast<size_t>(e.from)];
    const Vertex& to = graph.vertices[static_cast<size_t>(e.to)];
    return price_move(e.heading_deg, e.distance_m, from.mode, to.mode, wind, polar, m);
}

}  // namespace

DagCosts relax_dag(const CourtGraph& graph, const WindField& field, const PolarTable& polar,
                   const EdgeCostModel& m, const std::vector<int>& start_ids) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    size_t n = static_cast<size_t>(graph.vertex_count());
    DagCosts out{std::vector<double>(n, inf), std::vector<int>(n, 0), std::vector<int>(n, -1)};

    for (int s : start_ids) out.cost[static_cast<size_t>(s)] = 0.0;

    // Topological order: layers strictly decrease along edges, so relaxing
    // vertices by descending layer (ties by vertex id) visits every edge
    // after its tail is final.
    std::vector<int> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        int la = graph.vertices[static_cast<size_t>(a)].layer;
        int lb = graph.vertices[static_cast<size_t>(b)].layer;
        return la != lb ? la > lb : a < b;
    });

    for (int u : order) {
        if (out.cost[static_cast<size_t>(u)] == inf) continue;
        WindCellState wind = field.at(graph.vertices[static_cast<size_t>(u)].cell);
        for (const Edge& e : graph.out_edges[static_cast<size_t>(u)]) {
            EdgePrice price = price_edge(graph, e, wind, polar, m);
            if (!price.feasible) continue;
            double nc = out.cost[static_cast<size_t>(u)] + price.seconds;
            int nh = out.hops[static_cast<size_t>(u)] + 1;
            size_t v = static_cast<size_t>(e.to);
            bool better =
                nc < out.cost[v] || (nc == out.cost[v] && nh < out.hops[v]) ||
                (nc == out.cost[v] && nh == out.hops[v] && out.pred[v] >= 0 && u < out.pred[v]);
            if (better) {
                out.cost[v] = nc;
                out.hops[v] = nh;
                out.pred[v] = u;
            }
        }
    }
    return out;
}

Route extract_route(const CourtGraph& graph, const DagCosts& costs, int goal_id) {
    std::vector<int> chain;
    for (int v = goal_id; v >= 0; v = costs.pred[static_cast<size_t>(v)]) chain.push_back(v);
    std::reverse(chain.begin(), chain.end());
    Route route;
    for (int v : chain) {
        const Vertex& vert = graph.vertices[static_cast<size_t>(v)];
        route.steps.push_back({vert.cell, vert.mode});
    }
    return route;
}

ExactResult exact_min_path(const CourtGraph& graph, const WindField& field,
                           const PolarTable& polar, const EdgeCostModel& m) {
    DagCosts costs = relax_dag(graph, field, polar, m, graph.start_vertices);

    int best = -1;
    for (int g : graph.goal_vertices) {
        size_t gi = static_cast<size_t>(g);
        if (costs.cost[gi] == std::numeric_limits<double>::infinity()) continue;
        if (best < 0) {
            best = g;
            continue;
        }
        size_t bi = static_cast<size_t>(best);
        if (costs.cost[gi] < costs.cost[bi] ||
            (costs.cost[gi] == costs.cost[bi] &&
             (costs.hops[gi] < costs.hops[bi] ||
              (costs.hops[gi] == costs.hops[bi] && g < best))))
            best = g;
    }
    if (best < 0) throw InfeasibleError("no feasible route for this wind");

    return {extract_route(graph, costs, best), costs.cost[static_cast<size_t>(best)]};
}

double Route::total_length_m(double cell_size_m) const {
    double total = 0.0;
    for (size_t i = 1; i < steps.size(); ++i) {
        int dx = steps[i].cell.x - steps[i - 1].cell.x;
        int dy = steps[i].cell.y - steps[i - 1].cell.y;
        total += cell_size_m * std::sqrt(double(dx * dx + dy * dy));
    }
    return total;
}

namespace {

template <typename WindAt>
std::optional<double> accumulate_route(const Route& route, const CourtSpec& court,
                                       const PolarTable& polar, const EdgeCostModel& m,
                                       WindAt wind_at) {
    double elapsed = 0.0;
    for (size_t i = 1; i < route.steps.size(); ++i) {
        const RouteStep& a = route.steps[i - 1];
        const RouteStep& b = route.steps[i];
        int dx = b.cell.x - a.cell.x;
        int dy = b.cell.y - a.cell.y;
        double dist = court.cell_size_m * std::sqrt(double(dx * dx + dy * dy));
        double heading = bearing_deg(a.cell, b.cell);
        EdgePrice price = price_move(heading, dist, a.mode, b.mode, wind_at(elapsed, a.cell),
                                     polar, m);
        if (!price.feasible) return std::nullopt;
        elapsed += price.seconds;
    }
    return elapsed;
}

}  // namespace

std::optional<double> route_cost(const Route& route, const Scenario& scenario,
                                 const CourtSpec& court, const PolarTable& polar,
                                 const EdgeCostModel& m) {
    return accumulate_route(route, court, polar, m, [&](double elapsed, Cell c) {
        return scenario.field_at(elapsed).at(c);
    });
}

std::optional<double> route_cost_static(const Route& route, const WindField& field,
                                        const CourtSpec& court, const PolarTable& polar,
                                        const EdgeCostModel& m) {
    return accumulate_route(route, court, polar, m,
                            [&](double, Cell c) { return field.at(c); });
}

void write_route(const Route& route, std::ostream& out) {
    for (const RouteStep& s : route.steps)
        out << s.cell.x << ',' << s.cell.y << ',' << to_string(s.mode) << '\n';
}

void write_route_file(const Route& route, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open route file for write: " + path);
    write_route(route, out);
}

Route read_route(std::istream& in, const CourtSpec& court) {
    Route route;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string xs, ys, ms;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ',') || !std::getline(ss, ms))
            throw ParseError("route line must be x,y,mode: " + line);
        RouteStep step{{std::stoi(xs), std::stoi(ys)}, sailing_mode_from_string(ms)};
        if (!court.is_navigable(step.cell))
            throw InvalidError("route step not navigable on this court");
        route.steps.push_back(step);
    }
    for (size_t i = 1; i < route.steps.size(); ++i) {
        int dx = std::abs(route.steps[i].cell.x - route.steps[i - 1].cell.x);
        int dy = std::abs(route.steps[i].cell.y - route.steps[i - 1].cell.y);
        if (dx > 1 || dy > 1 || (dx == 0 && dy == 0))
            throw InvalidError("route steps must move between 8-neighbor cells");
    }
    return route;
}

Route read_route_file(const std::string& path, const CourtSpec& court) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open route file: " + path);
    return read_route(in, court);
}

}  // namespace regatta
