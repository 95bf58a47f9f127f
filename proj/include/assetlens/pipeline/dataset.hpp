#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "assetlens/nn/tensor.hpp"

namespace assetlens::pipeline {

// One night-light grid cell: quantized intensity plus the index of the
// daytime image it is linked to.
struct NightCell {
    std::string cell_id;
    int intensity = 0;  // {0..63}
    std::size_t image_index = 0;
};

// Image/target pairs with a deterministic train/test assignment.
struct Dataset {
    std::vector<nn::Tensor> images;      // each (c,h,w)
    nn::Tensor targets;                  // (N, D)
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t split_seed = 0;

    std::size_t size() const { return images.size(); }
};

// Seeded shuffle followed by a contiguous split; train gets
// round(train_fraction * N), the remainder is test. Disjoint and exhaustive.
void split(Dataset& dataset, double train_fraction, std::uint64_t seed);

// Removes a seeded random subset of the modal-intensity cells (the most
// frequent intensity, lowest value on ties) until the skewness of the
// remaining intensities drops to target_skew. The removal count is found by
// bisection. Throws InputError with the achieved skew when even removing
// every modal cell cannot reach the target.
std::vector<NightCell> undersample_skew(const std::vector<NightCell>& cells,
                                        double target_skew, std::uint64_t seed);

}  // namespace assetlens::pipeline
