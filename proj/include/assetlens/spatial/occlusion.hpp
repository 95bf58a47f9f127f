#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "assetlens/nn/network.hpp"

namespace assetlens::spatial {

// Sliding-occluder sensitivity map: for every placement the patch is
// replaced with the fill value and the indicator's prediction recorded.
struct OcclusionHeatmap {
    std::string source;
    std::size_t indicator = 0;
    std::size_t occluder = 16;
    std::size_t stride = 8;
    double fill_value = 0.0;
    std::size_t rows = 0;  // ceil((image - occluder)/stride) + 1 per axis
    std::size_t cols = 0;
    std::vector<double> values;       // row-major predictions under occlusion
    double baseline = 0.0;            // unoccluded prediction

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// The source image is never mutated; placements are clamped so the occluder
// always fits inside the image.
OcclusionHeatmap occlusion_heatmap(const nn::Network& net, const nn::Tensor& image,
                                   std::size_t indicator, std::size_t occluder = 16,
                                   std::size_t stride = 8, double fill_value = 0.0);

}  // namespace assetlens::spatial
