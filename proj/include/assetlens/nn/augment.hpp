#pragma once

#include <cstdint>
#include <vector>

#include "assetlens/nn/tensor.hpp"

namespace assetlens::nn {

// On-the-fly augmentation: flips and quarter-turn rotations only.
struct AugmentSpec {
    bool horizontal_flip = false;
    bool vertical_flip = false;
    std::vector<int> rotations;  // subset of {0, 90, 180, 270}, degrees
    std::uint64_t seed = 0;

    void validate() const;
};

// Transform primitives on a 2D (h,w) or channel-first 3D (c,h,w) image.
Tensor flip_horizontal(const Tensor& image);
Tensor flip_vertical(const Tensor& image);
Tensor rotate90(const Tensor& image, int quarter_turns);  // clockwise

// One deterministic transform per (spec.seed, draw): a rotation drawn from
// the configured set, then each enabled flip with probability 1/2.
// Preserves the pixel-value multiset.
Tensor augment(const Tensor& image, const AugmentSpec& spec, std::uint64_t draw);

}  // namespace assetlens::nn
