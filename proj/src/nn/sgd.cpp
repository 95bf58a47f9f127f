#include "assetlens/nn/sgd.hpp"

#include <cmath>

#include "assetlens/common/error.hpp"

namespace assetlens::nn {

void SgdConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0,1]");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (step_interval < 1) throw ConfigError("step_interval must be >= 1");
}

double learning_rate_at(const SgdConfig& config, std::uint64_t iteration) {
    const std::uint64_t steps = iteration / config.step_interval;
    return config.learning_rate * std::pow(config.gamma, static_cast<double>(steps));
}

void sgd_step(Network& net, const Gradients& grads, const SgdConfig& config,
              std::uint64_t iteration) {
    config.validate();
    if (grads.weights.size() != net.layers.size())
        throw InputError("gradient count does not match layer count");
    const double lr = learning_rate_at(config, iteration);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        LayerState& st = net.layers[li];
        if (st.weights.size() == 0) continue;
        const Tensor& gw = grads.weights[li];
        const Tensor& gb = grads.bias[li];
        if (!gw.same_shape(st.weights) || !gb.same_shape(st.bias))
            throw InputError("gradient shape mismatch at layer " + std::to_string(li));
        for (double g : gw.data)
            if (!std::isfinite(g))
                throw NumericError("non-finite weight gradient at layer " +
                                   std::to_string(li));
        for (double g : gb.data)
            if (!std::isfinite(g))
                throw NumericError("non-finite bias gradient at layer " +
                                   std::to_string(li));
        const double decay = config.weight_decay * st.decay_multiplier;
        for (std::size_t i = 0; i < st.weights.size(); ++i) {
            double& v = st.w_momentum[i];
            v = config.momentum * v - lr * (gw[i] + decay * st.weights[i]);
            st.weights[i] += v;
        }
        for (std::size_t i = 0; i < st.bias.size(); ++i) {
            double& v = st.b_momentum[i];
            v = config.momentum * v - lr * gb[i];
            st.bias[i] += v;
        }
    }
}

}  // namespace assetlens::nn
