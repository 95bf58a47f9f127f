#pragma once

#include <array>
#include <string>
#include <vector>

#include "assetlens/spatial/grid.hpp"

namespace assetlens::spatial {

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Color&) const = default;
};

// Linear-interpolated color ramp over a value range; out-of-range values are
// clamped to the end stops, missing cells get the sentinel color.
struct Palette {
    std::vector<Color> stops;
    double min_value = 0.0;
    double max_value = 1.0;
    Color missing = {255, 0, 255};

    Color map(double value) const;

    static Palette sequential(double min_value, double max_value);
};

// Rasterizes the grid (cell_pixels x cell_pixels per cell) to a PNG and
// writes a JSON legend sidecar next to it (<path>.legend.json).
void render_choropleth(const GeoGrid& grid, const Palette& palette,
                       const std::string& path, std::size_t cell_pixels = 8);

// Pixel buffer variant used by tests and the renderer itself.
std::vector<std::uint8_t> rasterize_choropleth(const GeoGrid& grid,
                                               const Palette& palette,
                                               std::size_t cell_pixels);

}  // namespace assetlens::spatial
