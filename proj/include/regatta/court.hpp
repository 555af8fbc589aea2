#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "regatta/common.hpp"

namespace regatta {

// Tack side. The third dimension of the court graph; changing it mid-route is
// a maneuver (tack or gybe depending on how the boat crosses the wind).
enum class SailingMode : int { port = 0, starboard = 1 };

inline const char* to_string(SailingMode m) {
    return m == SailingMode::port ? "port" : "starboard";
}
SailingMode sailing_mode_from_string(const std::string& s);

// Static description of the regatta area: a rectangular grid of square cells
// with navigability, a gust-fall probability distribution over navigable
// cells, and the start/goal cells.
//
// Angle convention used throughout the toolkit: wind direction is the
// direction the wind blows FROM, in degrees clockwise from north. Headings
// are the direction of travel, same units.
struct CourtSpec {
    int width_cells = 0;
    int height_cells = 0;
    double cell_size_m = 0.0;
    Grid<char> navigable;          // 1 navigable, 0 blocked
    Grid<double> gust_fall_prob;   // sums to 1 over navigable cells, 0 elsewhere
    Cell start_cell;
    Cell goal_cell;

    bool is_navigable(Cell c) const { return navigable.in_bounds(c) && navigable.at(c) != 0; }
    double area_km2() const {
        return width_cells * height_cells * cell_size_m * cell_size_m / 1e6;
    }
    std::vector<Cell> navigable_cells() const;  // in (y, x) order
};

// Boat speed as a function of true wind angle and wind speed (a VMG chart).
// The table covers angles in [0, 180]; queries are folded into that range.
struct PolarTable {
    std::vector<double> angle_grid;   // degrees, sorted, spans [0, 180]
    std::vector<double> speed_grid;   // wind m/s, sorted ascending
    std::vector<std::vector<double>> boat_speed;  // [angle][speed], m/s
    double no_go_angle_deg = 30.0;
};

// Parses a court document (JSON, see README for the schema). Validates all
// CourtSpec invariants; gust probabilities are renormalized when they sum to
// a positive value other than 1.
CourtSpec load_court(std::istream& in);
CourtSpec load_court_file(const std::string& path);

// Parses a polar CSV: header row of wind speeds, first column angles, body =
// boat speeds. Lines starting with '#' are metadata comments and may carry
// `no_go_angle_deg=<value>`.
PolarTable load_polar(std::istream& in);
PolarTable load_polar_file(const std::string& path);

// Built-in polar used when an experiment does not ship its own table.
PolarTable default_polar();
void write_polar(const PolarTable& polar, std::ostream& out);

// Bilinear interpolation over (folded angle, clamped wind speed). Returns 0
// inside the no-go zone.
double polar_speed(const PolarTable& polar, double true_wind_angle_deg, double wind_speed_mps);

}  // namespace regatta
