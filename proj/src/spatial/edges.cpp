#include "assetlens/spatial/edges.hpp"

#include <algorithm>
#include <cmath>

namespace assetlens::spatial {

namespace {

// Derivative along one axis at (row, col): central difference when both
// neighbours are present, one-sided otherwise, 0 when isolated.
double axis_derivative(const GeoGrid& g, std::size_t row, std::size_t col, bool along_x) {
    const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(row);
    const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(col);
    const std::ptrdiff_t dr = along_x ? 0 : 1;
    const std::ptrdiff_t dc = along_x ? 1 : 0;

    auto value_at = [&](std::ptrdiff_t rr, std::ptrdiff_t cc) -> const double* {
        if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(g.height) ||
            cc >= static_cast<std::ptrdiff_t>(g.width))
            return nullptr;
        const std::size_t idx = static_cast<std::size_t>(rr) * g.width +
                                static_cast<std::size_t>(cc);
        return g.present[idx] ? &g.values[idx] : nullptr;
    };

    const double* prev = value_at(r - dr, c - dc);
    const double* next = value_at(r + dr, c + dc);
    const double here = g.at(row, col);
    if (prev && next) return (*next - *prev) / 2.0;
    if (next) return *next - here;
    if (prev) return here - *prev;
    return 0.0;
}

}  // namespace

EdgeMap detect_edges(const GeoGrid& grid, const ThresholdPolicy& policy) {
    if (grid.width < 2 || grid.height < 2)
        throw InputError("edge detection needs a grid of at least 2x2");
    bool any_present = false;
    for (bool p : grid.present) any_present = any_present || p;
    if (!any_present) throw InputError("edge detection on an all-missing grid");

    EdgeMap map;
    map.width = grid.width;
    map.height = grid.height;
    map.magnitude.assign(grid.width * grid.height, 0.0);
    map.defined.assign(grid.width * grid.height, false);
    map.mask.assign(grid.width * grid.height, false);

    std::vector<double> finite;
    for (std::size_t row = 0; row < grid.height; ++row) {
        for (std::size_t col = 0; col < grid.width; ++col) {
            if (!grid.is_present(row, col)) continue;
            const double gx = axis_derivative(grid, row, col, true);
            const double gy = axis_derivative(grid, row, col, false);
            const double mag = std::sqrt(gx * gx + gy * gy);
            map.magnitude[grid.index(row, col)] = mag;
            map.defined[grid.index(row, col)] = true;
            finite.push_back(mag);
        }
    }

    if (policy.kind == ThresholdPolicy::Kind::Fixed) {
        map.threshold = policy.value;
    } else {
        std::sort(finite.begin(), finite.end());
        const double pct = std::clamp(policy.value, 0.0, 100.0);
        const double pos = pct / 100.0 * static_cast<double>(finite.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, finite.size() - 1);
        const double w = pos - static_cast<double>(lo);
        map.threshold = finite[lo] * (1.0 - w) + finite[hi] * w;
    }

    for (std::size_t i = 0; i < map.magnitude.size(); ++i)
        map.mask[i] = map.defined[i] && map.magnitude[i] > map.threshold;
    return map;
}

}  // namespace assetlens::spatial
