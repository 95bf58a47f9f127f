#pragma once

#include <cstdint>

#include "assetlens/nn/network.hpp"

namespace assetlens::nn {

struct GradCheckConfig {
    double epsilon = 1e-5;
    double weight_decay = 0.005;
    std::size_t samples_per_layer = 8;  // parameters probed per layer
    std::uint64_t seed = 0;             // parameter sampling + dropout masks
};

// Compares the analytic gradient of the regularized objective against
// central finite differences on a sampled parameter subset and returns the
// maximum relative error. Dropout masks are frozen per evaluation via the
// config seed so perturbed passes see the same mask.
double grad_check(const Network& net, const Tensor& batch, const Tensor& targets,
                  const GradCheckConfig& config = {});

}  // namespace assetlens::nn
