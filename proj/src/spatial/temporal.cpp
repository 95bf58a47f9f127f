#include "assetlens/spatial/temporal.hpp"

#include "assetlens/common/error.hpp"

namespace assetlens::spatial {

std::vector<census::AssetVector> temporal_track(const nn::Network& net,
                                                const std::vector<nn::Tensor>& sequence) {
    if (sequence.size() < 2)
        throw InputError("temporal tracking needs at least 2 images");
    for (const nn::Tensor& img : sequence)
        if (img.shape != sequence.front().shape)
            throw InputError("temporal sequence images must share extents");
    if (net.output_dim() != census::kIndicatorCount)
        throw InputError("temporal tracking needs a 16-output network");

    std::vector<census::AssetVector> series;
    series.reserve(sequence.size());
    for (std::size_t t = 0; t < sequence.size(); ++t) {
        std::vector<std::size_t> batch_shape = {1};
        batch_shape.insert(batch_shape.end(), sequence[t].shape.begin(),
                           sequence[t].shape.end());
        const nn::Tensor pred =
            nn::forward(net, nn::Tensor(batch_shape, sequence[t].data));
        census::AssetVector v;
        v.village_id = "t" + std::to_string(t);
        for (std::size_t k = 0; k < census::kIndicatorCount; ++k)
            v.values[k] = pred.at2(0, k);
        series.push_back(std::move(v));
    }
    return series;
}

}  // namespace assetlens::spatial
