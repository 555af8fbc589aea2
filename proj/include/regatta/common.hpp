#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace regatta {

// Error taxonomy surfaced through the C API as status codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct InvalidError : Error {
    using Error::Error;
};
struct InfeasibleError : Error {
    using Error::Error;
};

// A grid cell address. x grows eastward (column), y northward (row).
struct Cell {
    int x = 0;
    int y = 0;

    auto operator<=>(const Cell&) const = default;
};

// (y, x) ordering, used wherever a deterministic cell order is needed.
inline bool row_major_less(const Cell& a, const Cell& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
}

template <typename T>
class Grid {
   public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
    bool in_bounds(Cell c) const { return in_bounds(c.x, c.y); }

    T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
    T& at(Cell c) { return at(c.x, c.y); }
    const T& at(Cell c) const { return at(c.x, c.y); }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    bool operator==(const Grid&) const = default;

   private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

// Wraps an angle into [0, 360).
inline double wrap360(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0) a += 360.0;
    return a;
}

// Folds an angle into [0, 180]; fold180(a) == fold180(360 - a).
inline double fold180(double deg) {
    double a = wrap360(deg);
    return a > 180.0 ? 360.0 - a : a;
}

// Signed smallest rotation from `from` to `to`, in (-180, 180].
inline double angle_diff(double from, double to) {
    double d = wrap360(to - from);
    return d > 180.0 ? d - 360.0 : d;
}

}  // namespace regatta
