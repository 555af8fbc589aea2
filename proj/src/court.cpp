#include "regatta/court.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace regatta {

using nlohmann::json;

SailingMode sailing_mode_from_string(const std::string& s) {
    if (s == "port") return SailingMode::port;
    if (s == "starboard") return SailingMode::starboard;
    throw ParseError("unknown sailing mode: " + s);
}

std::vector<Cell> CourtSpec::navigable_cells() const {
    std::vector<Cell> cells;
    for (int y = 0; y < height_cells; ++y)
        for (int x = 0; x < width_cells; ++x)
            if (navigable.at(x, y)) cells.push_back({x, y});
    return cells;
}

namespace {

// 4-connected reachability over navigable cells.
bool path_exists(const CourtSpec& court, Cell from, Cell to) {
    Grid<char> seen(court.width_cells, court.height_cells, 0);
    std::deque<Cell> queue{from};
    seen.at(from) = 1;
    while (!queue.empty()) {
        Cell c = queue.front();
        queue.pop_front();
        if (c == to) return true;
        const int dx[] = {1, -1, 0, 0};
        const int dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            Cell n{c.x + dx[k], c.y + dy[k]};
            if (court.navigable.in_bounds(n) && court.navigable.at(n) && !seen.at(n)) {
                seen.at(n) = 1;
                queue.push_back(n);
            }
        }
    }
    return false;
}

Cell parse_cell(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw ParseError(std::string(what) + " must be [x, y]");
    return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

CourtSpec load_court(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("court document: ") + e.what());
    }

    CourtSpec court;
    try {
        court.width_cells = doc.at("width").get<int>();
        court.height_cells = doc.at("height").get<int>();
        court.cell_size_m = doc.at("cell_size_m").get<double>();
        court.start_cell = parse_cell(doc.at("start"), "start");
        court.goal_cell = parse_cell(doc.at("goal"), "goal");
    } catch (const json::exception& e) {
        throw ParseError(std::string("court document: ") + e.what());
    }
    if (court.width_cells <= 0 || court.height_cells <= 0)
        throw InvalidError("court dimensions must be positive");
    if (court.cell_size_m <= 0) throw InvalidError("cell_size_m must be positive");

    court.navigable = Grid<char>(court.width_cells, court.height_cells, 0);
    const auto& rows = doc.at("navigable");
    if (!rows.is_array() || static_cast<int>(rows.size()) != court.height_cells)
        throw ParseError("navigable must have one row string per row");
    for (int y = 0; y < court.height_cells; ++y) {
        const std::string row = rows[y].get<std::string>();
        if (static_cast<int>(row.size()) != court.width_cells)
            throw ParseError("navigable row " + std::to_string(y) + " has wrong length");
        for (int x = 0; x < court.width_cells; ++x) {
            if (row[x] == '.')
                court.navigable.at(x, y) = 1;
            else if (row[x] == '#')
                court.navigable.at(x, y) = 0;
            else
                throw ParseError("navigable cells must be '.' or '#'");
        }
    }

    if (!court.is_navigable(court.start_cell)) throw InvalidError("start not navigable");
    if (!court.is_navigable(court.goal_cell)) throw InvalidError("goal not navigable");
    if (!path_exists(court, court.start_cell, court.goal_cell))
        throw InvalidError("goal unreachable from start");

    court.gust_fall_prob = Grid<double>(court.width_cells, court.height_cells, 0.0);
    if (doc.contains("gust_prob")) {
        const auto& gp = doc["gust_prob"];
        if (!gp.is_array() || static_cast<int>(gp.size()) != court.height_cells)
            throw ParseError("gust_prob must have one row per court row");
        for (int y = 0; y < court.height_cells; ++y) {
            if (static_cast<int>(gp[y].size()) != court.width_cells)
                throw ParseError("gust_prob row " + std::to_string(y) + " has wrong length");
            for (int x = 0; x < court.width_cells; ++x) {
                double p = gp[y][x].get<double>();
                if (p < 0) throw InvalidError("gust probabilities must be >= 0");
                if (p > 0 && !court.navigable.at(x, y))
                    throw InvalidError("gust probability on non-navigable cell");
                court.gust_fall_prob.at(x, y) = p;
            }
        }
        double total = 0;
        for (double p : court.gust_fall_prob.data()) total += p;
        if (total <= 0) throw InvalidError("zero total gust probability");
        for (double& p : court.gust_fall_prob.data()) p /= total;
    } else {
        // Default: uniform over navigable cells.
        auto cells = court.navigable_cells();
        for (Cell c : cells) court.gust_fall_prob.at(c) = 1.0 / cells.size();
    }

    return court;
}

CourtSpec load_court_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open court file: " + path);
    return load_court(in);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

PolarTable load_polar(std::istream& in) {
    PolarTable polar;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            auto eq = line.find("no_go_angle_deg=");
            if (eq != std::string::npos)
                polar.no_go_angle_deg = std::stod(line.substr(eq + 16));
            continue;
        }
        auto fields = split_csv(line);
        if (!have_header) {
            // Header: first cell is a label, the rest are wind speeds.
            for (size_t i = 1; i < fields.size(); ++i)
                polar.speed_grid.push_back(std::stod(fields[i]));
            have_header = true;
            continue;
        }
        if (fields.size() != polar.speed_grid.size() + 1)
            throw ParseError("polar row has wrong field count");
        polar.angle_grid.push_back(std::stod(fields[0]));
        std::vector<double> row;
        for (size_t i = 1; i < fields.size(); ++i) row.push_back(std::stod(fields[i]));
        polar.boat_speed.push_back(std::move(row));
    }

    if (polar.angle_grid.size() < 2 || polar.speed_grid.size() < 2)
        throw ParseError("polar table needs at least a 2x2 grid");
    if (!std::is_sorted(polar.angle_grid.begin(), polar.angle_grid.end()) ||
        !std::is_sorted(polar.speed_grid.begin(), polar.speed_grid.end()))
        throw InvalidError("polar grids must be sorted ascending");
    if (polar.angle_grid.front() != 0.0 || polar.angle_grid.back() != 180.0)
        throw InvalidError("polar angle grid must span [0, 180]");
    for (size_t a = 0; a < polar.angle_grid.size(); ++a) {
        for (size_t s = 0; s < polar.speed_grid.size(); ++s) {
            double v = polar.boat_speed[a][s];
            if (v < 0) throw InvalidError("polar boat speeds must be >= 0");
            if (polar.angle_grid[a] < polar.no_go_angle_deg && v != 0)
                throw InvalidError("polar speed must be 0 inside the no-go zone");
            if (s > 0 && v < polar.boat_speed[a][s - 1])
                throw InvalidError("polar speed must be non-decreasing in wind speed");
        }
    }
    return polar;
}

PolarTable load_polar_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open polar file: " + path);
    return load_polar(in);
}

PolarTable default_polar() {
    PolarTable polar;
    polar.no_go_angle_deg = 30.0;
    polar.angle_grid = {0, 30, 45, 60, 75, 90, 110, 130, 150, 180};
    polar.speed_grid = {2, 4, 6, 8, 10, 12, 16, 20};
    // Relative performance by true wind angle, peaking at 110 degrees, scaled
    // sub-linearly with wind speed.
    const std::vector<double> base = {0, 0, 0.52, 0.62, 0.70, 0.76, 0.80, 0.74, 0.62, 0.50};
    for (size_t a = 0; a < polar.angle_grid.size(); ++a) {
        std::vector<double> row;
        for (double w : polar.speed_grid) {
            double v = base[a] * 1.9 * std::sqrt(w);
            row.push_back(std::round(v * 1000.0) / 1000.0);
        }
        polar.boat_speed.push_back(std::move(row));
    }
    return polar;
}

void write_polar(const PolarTable& polar, std::ostream& out) {
    out << "# no_go_angle_deg=" << polar.no_go_angle_deg << "\n";
    out << "angle";
    for (double w : polar.speed_grid) out << "," << w;
    out << "\n";
    for (size_t a = 0; a < polar.angle_grid.size(); ++a) {
        out << polar.angle_grid[a];
        for (double v : polar.boat_speed[a]) out << "," << v;
        out << "\n";
    }
}

namespace {

// Index of the grid interval containing v, clamped to the grid range.
size_t interval_below(const std::vector<double>& grid, double v) {
    if (v <= grid.front()) return 0;
    if (v >= grid.back()) return grid.size() - 2;
    size_t i = std::upper_bound(grid.begin(), grid.end(), v) - grid.begin();
    return i - 1;
}

}  // namespace

double polar_speed(const PolarTable& polar, double true_wind_angle_deg, double wind_speed_mps) {
    double angle = fold180(true_wind_angle_deg);
    if (angle < polar.no_go_angle_deg) return 0.0;

    double w = std::clamp(wind_speed_mps, polar.speed_grid.front(), polar.speed_grid.back());
    size_t ai = interval_below(polar.angle_grid, angle);
    size_t si = interval_below(polar.speed_grid, w);

    double a0 = polar.angle_grid[ai], a1 = polar.angle_grid[ai + 1];
    double s0 = polar.speed_grid[si], s1 = polar.speed_grid[si + 1];
    double ta = a1 == a0 ? 0.0 : (angle - a0) / (a1 - a0);
    double ts = s1 == s0 ? 0.0 : (w - s0) / (s1 - s0);

    double v00 = polar.boat_speed[ai][si], v01 = polar.boat_speed[ai][si + 1];
    double v10 = polar.boat_speed[ai + 1][si], v11 = polar.boat_speed[ai + 1][si + 1];
    double v0 = v00 + (v01 - v00) * ts;
    double v1 = v10 + (v11 - v10) * ts;
    return v0 + (v1 - v0) * ta;
}

}  // namespace regatta
