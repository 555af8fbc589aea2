#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "regatta/common.hpp"
#include "regatta/court.hpp"
#include "regatta/rng.hpp"

namespace regatta {

struct WindCellState {
    double speed_mps = 0.0;   // >= 0
    double angle_deg = 0.0;   // [0, 360), direction the wind blows from

    bool operator==(const WindCellState&) const = default;
};

using WindField = Grid<WindCellState>;

// A time-indexed wind sequence: fields[i] holds for t = 10*i seconds.
struct Scenario {
    static constexpr int step_seconds = 10;
    std::vector<WindField> fields;
    std::uint64_t seed = 0;

    int steps() const { return static_cast<int>(fields.size()); }
    // Field in effect at elapsed time t (the last one persists past the end).
    const WindField& field_at(double elapsed_s) const {
        int i = static_cast<int>(elapsed_s / step_seconds);
        if (i >= steps()) i = steps() - 1;
        if (i < 0) i = 0;
        return fields[static_cast<size_t>(i)];
    }
};

struct InitialStateParams {
    double mean_angle_deg = 90.0;
    double std_angle_deg = 0.0;
    double mean_speed_mps = 6.0;
    double std_speed_mps = 0.0;
    // West-east premises: speed rises and the angle bias fades from west
    // (x = 0) to east. Both default off; magnitudes are configuration.
    double west_east_speed_slope = 0.0;     // fraction of mean speed per court width
    double west_angle_perp_bias_deg = 0.0;  // degrees added at the west edge
};

struct PerturbParams {
    double sigma_speed_mps = 0.0;
    double sigma_angle_deg = 0.0;
    double seed_cell_fraction = 0.05;  // in (0, 1]
    double spread_decay = 0.5;         // attenuation per BFS hop
};

// Gust model parameters; letters match the simulation procedure's list.
struct GustParams {
    double mean_inter_gust_s = 0.0;     // (a); 0 disables gusts
    double mean_length_s = 60.0;        // (b)
    double std_length_s = 0.0;          // (c)
    double mean_angle_delta_deg = 0.0;  // (d)
    double std_angle_delta_deg = 0.0;   // (e)
    double mean_speed_delta_mps = 0.0;  // (f)
    double std_speed_delta_mps = 0.0;   // (g)
};

struct ActiveGust {
    Cell center_cell;
    double remaining_s = 0.0;
    double angle_delta_deg = 0.0;
    double speed_delta_mps = 0.0;
};

struct CellDelta {
    double dspeed = 0.0;
    double dangle = 0.0;
};

// Per-cell initial wind state drawn from the configured Gaussians; cells are
// visited in (y, x) order so a fixed seed reproduces the field bit for bit.
WindField gen_initial_state(const CourtSpec& court, const InitialStateParams& params,
                            std::uint64_t seed);

// Breadth-first wave over navigable 4-neighbors: every navigable cell
// receives the delta of its nearest seed attenuated by decay^hops. Ties
// between equidistant seeds go to the seed with the lowest (y, x).
WindField spread_changes(const WindField& field, const CourtSpec& court,
                         const std::map<Cell, CellDelta>& seeded, double decay);

// One 10-second simulation step: random cell perturbations, gust arrival and
// application, gust expiry. Returns the new field and surviving gusts.
std::pair<WindField, std::vector<ActiveGust>> step(const WindField& field,
                                                   const PerturbParams& perturb,
                                                   const GustParams& gusts,
                                                   std::vector<ActiveGust> active,
                                                   const CourtSpec& court, Rng& rng);

Scenario simulate_scenario(const CourtSpec& court, const WindField& initial, int steps,
                           const PerturbParams& perturb, const GustParams& gusts,
                           std::uint64_t seed);

// Binary scenario format, magic "WSC1" (see README). Little-endian.
void write_scenario(const Scenario& scenario, std::ostream& out);
void write_scenario_file(const Scenario& scenario, const std::string& path);
Scenario read_scenario(std::istream& in);
Scenario read_scenario_file(const std::string& path);

// One row per (t, y, x), for inspection and plotting.
void export_scenario_csv(const Scenario& scenario, std::ostream& out);

}  // namespace regatta
