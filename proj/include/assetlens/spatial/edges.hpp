#pragma once

#include <optional>

#include "assetlens/spatial/grid.hpp"

namespace assetlens::spatial {

struct ThresholdPolicy {
    enum class Kind { Fixed, Percentile };
    Kind kind = Kind::Percentile;
    double value = 90.0;  // threshold for Fixed, percentile in [0,100] otherwise

    static ThresholdPolicy fixed(double threshold) {
        return {Kind::Fixed, threshold};
    }
    static ThresholdPolicy percentile(double pct) {
        return {Kind::Percentile, pct};
    }
};

struct EdgeMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> magnitude;   // gradient magnitude per cell
    std::vector<bool> defined;       // magnitude computable (cell present)
    std::vector<bool> mask;          // mask <=> defined && magnitude > threshold
    double threshold = 0.0;

    double at(std::size_t row, std::size_t col) const {
        return magnitude[row * width + col];
    }
    bool edge(std::size_t row, std::size_t col) const {
        return mask[row * width + col];
    }
};

// Finite-difference gradient magnitude (central differences inside, one-sided
// at borders and next to missing cells) followed by thresholding.
EdgeMap detect_edges(const GeoGrid& grid, const ThresholdPolicy& policy = {});

}  // namespace assetlens::spatial
