#include "assetlens/nn/augment.hpp"

#include <algorithm>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"

namespace assetlens::nn {

void AugmentSpec::validate() const {
    for (int r : rotations)
        if (r != 0 && r != 90 && r != 180 && r != 270)
            throw ConfigError("rotation set must be a subset of {0,90,180,270}");
}

namespace {

struct ImageView {
    std::size_t channels, h, w;
};

ImageView view_of(const Tensor& image) {
    if (image.shape.size() == 2) return {1, image.shape[0], image.shape[1]};
    if (image.shape.size() == 3) return {image.shape[0], image.shape[1], image.shape[2]};
    throw InputError("augment expects a 2D or channel-first 3D image, got rank " +
                     std::to_string(image.shape.size()));
}

std::vector<std::size_t> shape_like(const Tensor& image, std::size_t h, std::size_t w) {
    if (image.shape.size() == 2) return {h, w};
    return {image.shape[0], h, w};
}

}  // namespace

Tensor flip_horizontal(const Tensor& image) {
    const ImageView v = view_of(image);
    Tensor out(image.shape);
    for (std::size_t c = 0; c < v.channels; ++c)
        for (std::size_t i = 0; i < v.h; ++i)
            for (std::size_t j = 0; j < v.w; ++j)
                out.data[(c * v.h + i) * v.w + j] =
                    image.data[(c * v.h + i) * v.w + (v.w - 1 - j)];
    return out;
}

Tensor flip_vertical(const Tensor& image) {
    const ImageView v = view_of(image);
    Tensor out(image.shape);
    for (std::size_t c = 0; c < v.channels; ++c)
        for (std::size_t i = 0; i < v.h; ++i)
            for (std::size_t j = 0; j < v.w; ++j)
                out.data[(c * v.h + i) * v.w + j] =
                    image.data[(c * v.h + (v.h - 1 - i)) * v.w + j];
    return out;
}

Tensor rotate90(const Tensor& image, int quarter_turns) {
    int q = ((quarter_turns % 4) + 4) % 4;
    if (q == 0) return image;
    const ImageView v = view_of(image);
    // One clockwise quarter turn: out(i,j) = in(h-1-j, i), out is (w x h).
    Tensor out(shape_like(image, v.w, v.h));
    for (std::size_t c = 0; c < v.channels; ++c)
        for (std::size_t i = 0; i < v.w; ++i)
            for (std::size_t j = 0; j < v.h; ++j)
                out.data[(c * v.w + i) * v.h + j] =
                    image.data[(c * v.h + (v.h - 1 - j)) * v.w + i];
    if (q == 1) return out;
    return rotate90(out, q - 1);
}

Tensor augment(const Tensor& image, const AugmentSpec& spec, std::uint64_t draw) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, "augment", draw));
    Tensor out = image;
    if (!spec.rotations.empty()) {
        const int deg = spec.rotations[rng.next_below(spec.rotations.size())];
        out = rotate90(out, deg / 90);
    }
    if (spec.horizontal_flip && rng.next_below(2) == 1) out = flip_horizontal(out);
    if (spec.vertical_flip && rng.next_below(2) == 1) out = flip_vertical(out);
    return out;
}

}  // namespace assetlens::nn
