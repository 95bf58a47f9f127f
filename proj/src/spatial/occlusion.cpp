#include "assetlens/spatial/occlusion.hpp"

#include <algorithm>
#include <cmath>

#include "assetlens/common/error.hpp"

namespace assetlens::spatial {

OcclusionHeatmap occlusion_heatmap(const nn::Network& net, const nn::Tensor& image,
                                   std::size_t indicator, std::size_t occluder,
                                   std::size_t stride, double fill_value) {
    if (image.shape.size() != 3)
        throw InputError("occlusion expects a (c,h,w) image");
    const std::size_t channels = image.shape[0];
    const std::size_t h = image.shape[1];
    const std::size_t w = image.shape[2];
    if (occluder == 0 || stride == 0)
        throw InputError("occluder and stride must be positive");
    if (occluder > h || occluder > w)
        throw InputError("occluder " + std::to_string(occluder) +
                         " exceeds image extents");
    if (indicator >= net.output_dim())
        throw InputError("indicator index out of range");

    auto placements = [&](std::size_t extent) {
        return (extent - occluder + stride - 1) / stride + 1;
    };

    OcclusionHeatmap map;
    map.indicator = indicator;
    map.occluder = occluder;
    map.stride = stride;
    map.fill_value = fill_value;
    map.rows = placements(h);
    map.cols = placements(w);
    map.values.assign(map.rows * map.cols, 0.0);

    std::vector<std::size_t> batch_shape = {1, channels, h, w};

    {
        const nn::Tensor pred = nn::forward(net, nn::Tensor(batch_shape, image.data));
        map.baseline = pred.at2(0, indicator);
    }

    for (std::size_t pr = 0; pr < map.rows; ++pr) {
        for (std::size_t pc = 0; pc < map.cols; ++pc) {
            const std::size_t r0 = std::min(pr * stride, h - occluder);
            const std::size_t c0 = std::min(pc * stride, w - occluder);
            nn::Tensor patched(batch_shape, image.data);
            for (std::size_t c = 0; c < channels; ++c)
                for (std::size_t r = r0; r < r0 + occluder; ++r)
                    for (std::size_t x = c0; x < c0 + occluder; ++x)
                        patched.data[(c * h + r) * w + x] = fill_value;
            const nn::Tensor pred = nn::forward(net, patched);
            map.values[pr * map.cols + pc] = pred.at2(0, indicator);
        }
    }
    return map;
}

}  // namespace assetlens::spatial
