#pragma once

#include <vector>

#include "assetlens/census/census.hpp"
#include "assetlens/nn/network.hpp"

namespace assetlens::spatial {

// Inference replay over an image sequence of one location: independent
// forward passes, one asset vector per time step.
std::vector<census::AssetVector> temporal_track(const nn::Network& net,
                                                const std::vector<nn::Tensor>& sequence);

}  // namespace assetlens::spatial
