#pragma once

#include <cstddef>
#include <vector>

#include "assetlens/common/error.hpp"

namespace assetlens::spatial {

// 2D lattice of per-cell indicator values with an optional missing mask.
struct GeoGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;   // row-major, height*width
    std::vector<bool> present;    // same layout; value defined where present

    GeoGrid() = default;
    GeoGrid(std::size_t w, std::size_t h)
        : width(w), height(h), values(w * h, 0.0), present(w * h, true) {}

    std::size_t index(std::size_t row, std::size_t col) const {
        return row * width + col;
    }
    double at(std::size_t row, std::size_t col) const { return values[index(row, col)]; }
    double& at(std::size_t row, std::size_t col) { return values[index(row, col)]; }
    bool is_present(std::size_t row, std::size_t col) const {
        return present[index(row, col)];
    }
    void set(std::size_t row, std::size_t col, double v) {
        values[index(row, col)] = v;
        present[index(row, col)] = true;
    }
    void set_missing(std::size_t row, std::size_t col) {
        present[index(row, col)] = false;
    }
};

}  // namespace assetlens::spatial
