#include "regatta/windsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>

namespace regatta {

WindField gen_initial_state(const CourtSpec& court, const InitialStateParams& params,
                            std::uint64_t seed) {
    Rng rng(seed);
    WindField field(court.width_cells, court.height_cells);
    for (int y = 0; y < court.height_cells; ++y) {
        for (int x = 0; x < court.width_cells; ++x) {
            double west = 1.0 - static_cast<double>(x) / court.width_cells;
            double mean_speed =
                params.mean_speed_mps * (1.0 - params.west_east_speed_slope * west);
            double mean_angle = params.mean_angle_deg + params.west_angle_perp_bias_deg * west;
            WindCellState& cell = field.at(x, y);
            cell.speed_mps = std::max(0.0, rng.normal(mean_speed, params.std_speed_mps));
            cell.angle_deg = wrap360(rng.normal(mean_angle, params.std_angle_deg));
        }
    }
    return field;
}

WindField spread_changes(const WindField& field, const CourtSpec& court,
                         const std::map<Cell, CellDelta>& seeded, double decay) {
    if (seeded.empty()) throw InvalidError("spread_changes needs at least one seed cell");

    // Multi-source BFS over navigable 4-neighbors. Seeds are ranked in (y, x)
    // order; a cell keeps the first (distance, rank) assignment it sees, so
    // equidistant claims resolve to the lowest-ranked seed.
    std::vector<std::pair<Cell, CellDelta>> seeds(seeded.begin(), seeded.end());
    std::sort(seeds.begin(), seeds.end(),
              [](const auto& a, const auto& b) { return row_major_less(a.first, b.first); });

    constexpr int unvisited = -1;
    Grid<int> owner(court.width_cells, court.height_cells, unvisited);
    Grid<int> dist(court.width_cells, court.height_cells, 0);
    std::deque<Cell> frontier;
    for (size_t r = 0; r < seeds.size(); ++r) {
        Cell c = seeds[r].first;
        if (!court.is_navigable(c)) throw InvalidError("spread seed on non-navigable cell");
        if (owner.at(c) == unvisited) {
            owner.at(c) = static_cast<int>(r);
            frontier.push_back(c);
        }
    }
    while (!frontier.empty()) {
        Cell c = frontier.front();
        frontier.pop_front();
        const int dx[] = {1, -1, 0, 0};
        const int dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            Cell n{c.x + dx[k], c.y + dy[k]};
            if (!court.is_navigable(n) || owner.at(n) != unvisited) continue;
            owner.at(n) = owner.at(c);
            dist.at(n) = dist.at(c) + 1;
            frontier.push_back(n);
        }
    }

    WindField out = field;
    for (int y = 0; y < court.height_cells; ++y) {
        for (int x = 0; x < court.width_cells; ++x) {
            int r = owner.at(x, y);
            if (r == unvisited) continue;  // non-navigable or cut off from all seeds
            const CellDelta& d = seeds[static_cast<size_t>(r)].second;
            double factor = std::pow(decay, dist.at(x, y));
            WindCellState& cell = out.at(x, y);
            cell.speed_mps = std::max(0.0, cell.speed_mps + d.dspeed * factor);
            cell.angle_deg = wrap360(cell.angle_deg + d.dangle * factor);
        }
    }
    return out;
}

namespace {

Cell draw_gust_center(const CourtSpec& court, Rng& rng) {
    double u = rng.next_unit();
    double acc = 0.0;
    Cell last{court.start_cell};
    for (int y = 0; y < court.height_cells; ++y) {
        for (int x = 0; x < court.width_cells; ++x) {
            double p = court.gust_fall_prob.at(x, y);
            if (p <= 0) continue;
            acc += p;
            last = {x, y};
            if (u < acc) return last;
        }
    }
    return last;  // u landed in the rounding tail
}

}  // namespace

std::pair<WindField, std::vector<ActiveGust>> step(const WindField& field,
                                                   const PerturbParams& perturb,
                                                   const GustParams& gusts,
                                                   std::vector<ActiveGust> active,
                                                   const CourtSpec& court, Rng& rng) {
    // Draw order is fixed: perturbation seeds, their deltas, the gust
    // arrival, then the new gust's parameters. Changing it changes runs.
    auto cells = court.navigable_cells();
    size_t n_seeds = static_cast<size_t>(
        std::ceil(perturb.seed_cell_fraction * static_cast<double>(cells.size())));
    n_seeds = std::clamp<size_t>(n_seeds, 1, cells.size());

    // Partial Fisher-Yates: the first n_seeds entries become the seed set.
    for (size_t i = 0; i < n_seeds; ++i) {
        size_t j = i + static_cast<size_t>(rng.below(cells.size() - i));
        std::swap(cells[i], cells[j]);
    }
    std::map<Cell, CellDelta> seeds;
    for (size_t i = 0; i < n_seeds; ++i) {
        CellDelta d{rng.normal(0.0, perturb.sigma_speed_mps),
                    rng.normal(0.0, perturb.sigma_angle_deg)};
        seeds[cells[i]] = d;
    }
    WindField out = spread_changes(field, court, seeds, perturb.spread_decay);

    if (gusts.mean_inter_gust_s > 0) {
        double p_arrival = std::min(1.0, Scenario::step_seconds / gusts.mean_inter_gust_s);
        if (rng.chance(p_arrival)) {
            Cell center = draw_gust_center(court, rng);
            double length = rng.normal(gusts.mean_length_s, gusts.std_length_s);
            double dangle = rng.normal(gusts.mean_angle_delta_deg, gusts.std_angle_delta_deg);
            double dspeed = rng.normal(gusts.mean_speed_delta_mps, gusts.std_speed_delta_mps);
            if (length > 0) active.push_back({center, length, dangle, dspeed});
        }
    }

    if (!active.empty()) {
        std::map<Cell, CellDelta> gust_seeds;
        for (const ActiveGust& g : active) {
            CellDelta& d = gust_seeds[g.center_cell];
            d.dspeed += g.speed_delta_mps;
            d.dangle += g.angle_delta_deg;
        }
        out = spread_changes(out, court, gust_seeds, perturb.spread_decay);
        std::vector<ActiveGust> survivors;
        for (ActiveGust& g : active) {
            g.remaining_s -= Scenario::step_seconds;
            if (g.remaining_s > 0) survivors.push_back(g);
        }
        active = std::move(survivors);
    }

    return {std::move(out), std::move(active)};
}

Scenario simulate_scenario(const CourtSpec& court, const WindField& initial, int steps,
                           const PerturbParams& perturb, const GustParams& gusts,
                           std::uint64_t seed) {
    if (steps < 1) throw InvalidError("scenario needs at least one step");
    Scenario scenario;
    scenario.seed = seed;
    scenario.fields.reserve(static_cast<size_t>(steps));
    scenario.fields.push_back(initial);
    Rng rng(seed);
    std::vector<ActiveGust> active;
    for (int i = 1; i < steps; ++i) {
        auto [next, survivors] = step(scenario.fields.back(), perturb, gusts, std::move(active),
                                      court, rng);
        scenario.fields.push_back(std::move(next));
        active = std::move(survivors);
    }
    return scenario;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "scenario files are little-endian; byte swapping is not implemented");

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ParseError("scenario file truncated");
    return v;
}

}  // namespace

void write_scenario(const Scenario& scenario, std::ostream& out) {
    out.write("WSC1", 4);
    const WindField& first = scenario.fields.at(0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(first.width()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(first.height()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(scenario.steps()));
    put<std::uint64_t>(out, scenario.seed);
    for (const WindField& field : scenario.fields) {
        for (int y = 0; y < field.height(); ++y) {
            for (int x = 0; x < field.width(); ++x) {
                put<float>(out, static_cast<float>(field.at(x, y).speed_mps));
                put<float>(out, static_cast<float>(field.at(x, y).angle_deg));
            }
        }
    }
    if (!out) throw IoError("scenario write failed");
}

void write_scenario_file(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open scenario file for write: " + path);
    write_scenario(scenario, out);
}

Scenario read_scenario(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WSC1", 4) != 0)
        throw ParseError("not a WSC1 scenario file");
    auto width = get<std::uint32_t>(in);
    auto height = get<std::uint32_t>(in);
    auto steps = get<std::uint32_t>(in);
    Scenario scenario;
    scenario.seed = get<std::uint64_t>(in);
    if (steps == 0) throw ParseError("scenario file has no fields");
    scenario.fields.reserve(steps);
    for (std::uint32_t t = 0; t < steps; ++t) {
        WindField field(static_cast<int>(width), static_cast<int>(height));
        for (int y = 0; y < field.height(); ++y) {
            for (int x = 0; x < field.width(); ++x) {
                field.at(x, y).speed_mps = get<float>(in);
                field.at(x, y).angle_deg = get<float>(in);
            }
        }
        scenario.fields.push_back(std::move(field));
    }
    return scenario;
}

Scenario read_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file: " + path);
    return read_scenario(in);
}

void export_scenario_csv(const Scenario& scenario, std::ostream& out) {
    out << "t,y,x,speed_mps,angle_deg\n";
    for (int t = 0; t < scenario.steps(); ++t) {
        const WindField& field = scenario.fields[static_cast<size_t>(t)];
        for (int y = 0; y < field.height(); ++y)
            for (int x = 0; x < field.width(); ++x)
                out << t << ',' << y << ',' << x << ',' << field.at(x, y).speed_mps << ','
                    << field.at(x, y).angle_deg << '\n';
    }
}

}  // namespace regatta
