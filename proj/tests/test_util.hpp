#pragma once

#include <sstream>
#include <string>

#include "regatta/court.hpp"
#include "regatta/windsim.hpp"

namespace regatta::test {

// Builds a court document from row strings ('.' navigable, '#' blocked).
// rows[0] is y = 0.
inline CourtSpec make_court(const std::vector<std::string>& rows, Cell start, Cell goal,
                            double cell_size_m = 50.0) {
    std::ostringstream doc;
    doc << "{\"width\":" << rows[0].size() << ",\"height\":" << rows.size()
        << ",\"cell_size_m\":" << cell_size_m << ",\"navigable\":[";
    for (size_t i = 0; i < rows.size(); ++i)
        doc << (i ? "," : "") << '"' << rows[i] << '"';
    doc << "],\"start\":[" << start.x << ',' << start.y << "],\"goal\":[" << goal.x << ','
        << goal.y << "]}";
    std::istringstream in(doc.str());
    return load_court(in);
}

inline CourtSpec open_court(int width, int height, Cell start, Cell goal,
                            double cell_size_m = 50.0) {
    std::vector<std::string> rows(static_cast<size_t>(height),
                                  std::string(static_cast<size_t>(width), '.'));
    return make_court(rows, start, goal, cell_size_m);
}

// Every cell blows the same wind.
inline WindField uniform_field(const CourtSpec& court, double speed_mps, double angle_deg) {
    WindField field(court.width_cells, court.height_cells);
    for (auto& cell : field.data()) cell = {speed_mps, angle_deg};
    return field;
}

inline Scenario static_scenario(const WindField& field, int steps = 1) {
    Scenario s;
    for (int i = 0; i < steps; ++i) s.fields.push_back(field);
    return s;
}

}  // namespace regatta::test
