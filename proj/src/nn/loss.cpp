#include "assetlens/nn/loss.hpp"

#include "assetlens/common/error.hpp"

namespace assetlens::nn {

LossResult euclidean_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target))
        throw InputError("euclidean_loss: prediction shape " + pred.shape_str() +
                         " != target shape " + target.shape_str());
    if (pred.shape.empty() || pred.shape[0] == 0)
        throw InputError("euclidean_loss: empty batch");
    const double m = static_cast<double>(pred.shape[0]);
    LossResult res;
    res.grad = Tensor(pred.shape);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - target[i];
        acc += diff * diff;
        res.grad[i] = diff / m;
    }
    res.value = acc / (2.0 * m);
    return res;
}

double regularized_objective(const Network& net, double data_loss, double weight_decay) {
    double reg = 0.0;
    for (const auto& layer : net.layers) {
        if (layer.weights.size() == 0) continue;
        double sq = 0.0;
        for (double w : layer.weights.data) sq += w * w;
        reg += layer.decay_multiplier * sq;
    }
    return data_loss + 0.5 * weight_decay * reg;
}

}  // namespace assetlens::nn
