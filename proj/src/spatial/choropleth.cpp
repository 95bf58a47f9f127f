#include "assetlens/spatial/choropleth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "assetlens/common/csv.hpp"
#include "assetlens/io/png.hpp"

namespace assetlens::spatial {

Color Palette::map(double value) const {
    if (stops.empty()) return missing;
    if (stops.size() == 1) return stops[0];
    const double span = max_value - min_value;
    double t = span > 0.0 ? (value - min_value) / span : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * static_cast<double>(stops.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, stops.size() - 1);
    const double w = pos - static_cast<double>(lo);
    auto lerp = [w](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround((1.0 - w) * a + w * b));
    };
    return {lerp(stops[lo].r, stops[hi].r), lerp(stops[lo].g, stops[hi].g),
            lerp(stops[lo].b, stops[hi].b)};
}

Palette Palette::sequential(double min_value, double max_value) {
    Palette p;
    p.min_value = min_value;
    p.max_value = max_value;
    // Dark blue -> teal -> yellow ramp.
    p.stops = {{13, 8, 135}, {126, 3, 168}, {204, 71, 120}, {248, 149, 64},
               {240, 249, 33}};
    return p;
}

std::vector<std::uint8_t> rasterize_choropleth(const GeoGrid& grid,
                                               const Palette& palette,
                                               std::size_t cell_pixels) {
    if (grid.width == 0 || grid.height == 0)
        throw InputError("choropleth needs a non-empty grid");
    if (cell_pixels == 0) throw InputError("cell_pixels must be positive");
    const std::size_t w = grid.width * cell_pixels;
    const std::size_t h = grid.height * cell_pixels;
    std::vector<std::uint8_t> rgb(w * h * 3);
    for (std::size_t row = 0; row < grid.height; ++row) {
        for (std::size_t col = 0; col < grid.width; ++col) {
            const Color c = grid.is_present(row, col)
                                ? palette.map(grid.at(row, col))
                                : palette.missing;
            for (std::size_t pr = 0; pr < cell_pixels; ++pr) {
                for (std::size_t pc = 0; pc < cell_pixels; ++pc) {
                    const std::size_t px =
                        ((row * cell_pixels + pr) * w + col * cell_pixels + pc) * 3;
                    rgb[px] = c.r;
                    rgb[px + 1] = c.g;
                    rgb[px + 2] = c.b;
                }
            }
        }
    }
    return rgb;
}

void render_choropleth(const GeoGrid& grid, const Palette& palette,
                       const std::string& path, std::size_t cell_pixels) {
    const auto rgb = rasterize_choropleth(grid, palette, cell_pixels);
    io::write_png_rgb(path, grid.width * cell_pixels, grid.height * cell_pixels, rgb);

    nlohmann::json legend;
    legend["min_value"] = palette.min_value;
    legend["max_value"] = palette.max_value;
    nlohmann::json stops = nlohmann::json::array();
    for (const Color& c : palette.stops) stops.push_back({c.r, c.g, c.b});
    legend["stops"] = std::move(stops);
    legend["missing_color"] = {palette.missing.r, palette.missing.g, palette.missing.b};
    legend["cell_pixels"] = cell_pixels;
    std::ofstream out(path + ".legend.json", std::ios::binary);
    if (!out) throw IoError("cannot write legend file: " + path + ".legend.json");
    out << legend.dump(2) << '\n';
}

}  // namespace assetlens::spatial
