#pragma once

#include "assetlens/nn/network.hpp"
#include "assetlens/nn/tensor.hpp"

namespace assetlens::nn {

struct LossResult {
    double value = 0.0;
    Tensor grad;  // d(loss)/d(pred), same shape as pred
};

// Euclidean loss over a batch of M rows:
//   L = 1/(2M) * sum_i sum_j (pred_ij - target_ij)^2,  dL/dpred = (pred-target)/M.
// The L2 term is NOT part of this loss; it enters as weight decay in sgd_step.
LossResult euclidean_loss(const Tensor& pred, const Tensor& target);

// Full training objective for monitoring and gradient checks:
//   C = data_loss + (d/2) * sum_l d_l * sum(w_l^2)   (weights only, biases excluded).
double regularized_objective(const Network& net, double data_loss, double weight_decay);

}  // namespace assetlens::nn
