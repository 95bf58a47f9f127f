#include "assetlens/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "assetlens/common/rng.hpp"
#include "assetlens/nn/loss.hpp"

namespace assetlens::nn {

namespace {

struct Evaluation {
    double objective = 0.0;
    std::vector<bool> relu_pattern;  // activation states, for kink detection
};

Evaluation objective_at(const Network& net, const Tensor& batch, const Tensor& targets,
                        double weight_decay, std::uint64_t mask_seed) {
    Rng rng(mask_seed);
    ForwardCache cache;
    const Tensor pred = forward_cached(net, batch, cache, /*training=*/true, &rng);
    Evaluation eval;
    eval.objective =
        regularized_objective(net, euclidean_loss(pred, targets).value, weight_decay);
    for (std::size_t li = 0; li < net.spec.layers.size(); ++li)
        if (net.spec.layers[li].kind == LayerKind::Relu)
            for (double v : cache.acts[li].data) eval.relu_pattern.push_back(v > 0.0);
    return eval;
}

}  // namespace

double grad_check(const Network& net, const Tensor& batch, const Tensor& targets,
                  const GradCheckConfig& config) {
    const std::uint64_t mask_seed = derive_seed(config.seed, "gradcheck.mask");

    // Analytic gradient of the full objective: backprop of the data loss
    // plus the decay term d*d_l*w on weights.
    ForwardCache cache;
    Rng mask_rng(mask_seed);
    const Tensor pred = forward_cached(net, batch, cache, /*training=*/true, &mask_rng);
    const LossResult loss = euclidean_loss(pred, targets);
    Gradients analytic = backward(net, cache, loss.grad);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const LayerState& st = net.layers[li];
        if (st.weights.size() == 0) continue;
        const double decay = config.weight_decay * st.decay_multiplier;
        for (std::size_t i = 0; i < st.weights.size(); ++i)
            analytic.weights[li][i] += decay * st.weights[i];
    }

    Rng pick(derive_seed(config.seed, "gradcheck.pick"));
    Network probe = net;
    double max_rel = 0.0;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        LayerState& st = probe.layers[li];
        if (st.weights.size() == 0) continue;
        const std::size_t nw = st.weights.size();
        const std::size_t nb = st.bias.size();
        const std::size_t total = nw + nb;
        const std::size_t probes = std::min<std::size_t>(config.samples_per_layer, total);
        std::size_t done = 0, attempts = 0;
        while (done < probes && attempts < probes * 10) {
            ++attempts;
            const std::size_t idx = pick.next_below(total);
            double* param = idx < nw ? &st.weights[idx] : &st.bias[idx - nw];
            const double a = idx < nw ? analytic.weights[li][idx]
                                      : analytic.bias[li][idx - nw];
            const double orig = *param;
            *param = orig + config.epsilon;
            const Evaluation up = objective_at(probe, batch, targets,
                                               config.weight_decay, mask_seed);
            *param = orig - config.epsilon;
            const Evaluation down = objective_at(probe, batch, targets,
                                                 config.weight_decay, mask_seed);
            *param = orig;
            // A probe that flips a relu unit straddles a kink: the two-sided
            // derivative is undefined there, so sample another parameter.
            if (up.relu_pattern != down.relu_pattern) continue;
            const double numeric =
                (up.objective - down.objective) / (2.0 * config.epsilon);
            const double rel = std::abs(a - numeric) / std::max(std::abs(numeric), 1e-6);
            max_rel = std::max(max_rel, rel);
            ++done;
        }
    }
    return max_rel;
}

}  // namespace assetlens::nn
