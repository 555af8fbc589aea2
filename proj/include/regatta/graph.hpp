#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regatta/common.hpp"
#include "regatta/court.hpp"
#include "regatta/windsim.hpp"

namespace regatta {

enum class Maneuver : int { none = 0, tack, gybe, bow_up, bow_down };

const char* to_string(Maneuver m);

// Maneuver penalties in seconds, plus the feasibility rule threshold: below
// upwind_mode_threshold_deg of true wind angle the boat must sail on the
// tack matching the wind side; at or above it both tacks are feasible.
struct EdgeCostModel {
    double tack_penalty_s = 4.0;
    double gybe_penalty_s = 3.0;
    double bow_up_penalty_s = 1.0;
    double bow_down_penalty_s = 1.0;
    double upwind_mode_threshold_deg = 90.0;

    double penalty(Maneuver m) const;
};

struct Vertex {
    Cell cell;
    SailingMode mode = SailingMode::port;
    int layer = 0;  // Manhattan distance to the graph's target cell
};

// A directed move between 8-neighbor cells. The layer strictly decreases
// along every edge, which is what makes the graph acyclic. Mode changes ride
// on movement edges; whether such a change is a tack or a gybe depends on
// the wind and is resolved when the edge is priced.
struct Edge {
    int from = -1;  // vertex ids
    int to = -1;
    double distance_m = 0.0;
    double heading_deg = 0.0;  // travel direction, clockwise from north
};

// Layered DAG over (cell, mode) vertices. Vertices are stored in (y, x,
// mode) order and pruned to those on some source-to-target path.
struct CourtGraph {
    Cell source_cell;
    Cell target_cell;
    double cell_size_m = 0.0;
    std::vector<Vertex> vertices;
    std::vector<std::vector<Edge>> out_edges;  // indexed by from-vertex
    std::vector<int> start_vertices;           // (source_cell, *) survivors
    std::vector<int> goal_vertices;            // (target_cell, *) survivors

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int edge_count() const;
    int find_vertex(Cell cell, SailingMode mode) const;  // -1 when pruned/absent
};

// A start-to-goal path as the sequence of (cell, mode) states it visits.
struct RouteStep {
    Cell cell;
    SailingMode mode = SailingMode::port;

    bool operator==(const RouteStep&) const = default;
};

struct Route {
    std::vector<RouteStep> steps;

    int edge_count() const { return steps.empty() ? 0 : static_cast<int>(steps.size()) - 1; }
    double total_length_m(double cell_size_m) const;
    bool operator==(const Route&) const = default;
};

// Builds the layered DAG from source to target (the standard graph uses the
// court's start and goal). Throws InfeasibleError when no path survives.
CourtGraph build_graph(const CourtSpec& court);
CourtGraph build_graph(const CourtSpec& court, Cell source, Cell target);

struct EdgePrice {
    bool feasible = false;
    double seconds = 0.0;
    Maneuver maneuver = Maneuver::none;
};

// Prices one move: navigation time (distance over polar speed) plus the
// maneuver penalty when the move changes mode. Infeasible inside the no-go
// zone and when sailing upwind on the wrong tack.
EdgePrice price_move(double heading_deg, double distance_m, SailingMode from_mode,
                     SailingMode to_mode, const WindCellState& wind, const PolarTable& polar,
                     const EdgeCostModel& m);

// Single-source (well, source-set) shortest path by relaxation in
// topological order. Deterministic: ties break on fewer edges, then on
// lexicographic (y, x, mode) order of the predecessor.
struct DagCosts {
    std::vector<double> cost;  // infinity where unreached
    std::vector<int> hops;
    std::vector<int> pred;
};
DagCosts relax_dag(const CourtGraph& graph, const WindField& field, const PolarTable& polar,
                   const EdgeCostModel& m, const std::vector<int>& start_ids);
Route extract_route(const CourtGraph& graph, const DagCosts& costs, int goal_id);

// Exact minimum-cost route for one static wind field.
struct ExactResult {
    Route route;
    double cost_s = 0.0;
};
ExactResult exact_min_path(const CourtGraph& graph, const WindField& field,
                           const PolarTable& polar, const EdgeCostModel& m);

// Cost of traversing a route under a time-dependent scenario. Each edge is
// priced with the wind at its from-cell at the time the boat reaches it.
// Returns nullopt when any edge is infeasible.
std::optional<double> route_cost(const Route& route, const Scenario& scenario,
                                 const CourtSpec& court, const PolarTable& polar,
                                 const EdgeCostModel& m);

// Same pricing against a single static field.
std::optional<double> route_cost_static(const Route& route, const WindField& field,
                                        const CourtSpec& court, const PolarTable& polar,
                                        const EdgeCostModel& m);

// Route text format: one `x,y,mode` line per step.
void write_route(const Route& route, std::ostream& out);
void write_route_file(const Route& route, const std::string& path);
Route read_route(std::istream& in, const CourtSpec& court);
Route read_route_file(const std::string& path, const CourtSpec& court);

}  // namespace regatta
