#pragma once

#include <cstdint>

#include "assetlens/nn/network.hpp"

namespace assetlens::nn {

// Hyper-parameters of the step-policy SGD. Defaults are the published
// training configuration; desk-scale runs usually override the rate.
struct SgdConfig {
    double learning_rate = 1e-6;
    double gamma = 0.2;          // step decay factor
    double momentum = 0.8;
    double weight_decay = 0.005; // d
    std::size_t batch_size = 32;
    std::size_t step_interval = 1000;  // iterations per decay step

    void validate() const;
};

// lr(t) = learning_rate * gamma^floor(t / step_interval)
double learning_rate_at(const SgdConfig& config, std::uint64_t iteration);

// One momentum SGD update with L2 weight decay folded into the gradient:
//   v <- momentum*v - lr*(grad + d*d_l*w);  w <- w + v
// Biases are updated without the decay term. Throws NumericError naming the
// layer index when a gradient is non-finite.
void sgd_step(Network& net, const Gradients& grads, const SgdConfig& config,
              std::uint64_t iteration);

}  // namespace assetlens::nn
