#include "assetlens/pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"
#include "assetlens/nn/loss.hpp"

namespace assetlens::pipeline {

namespace {

nn::Tensor gather_batch(const Dataset& dataset, const std::vector<std::size_t>& indices,
                        std::size_t begin, std::size_t end,
                        const nn::AugmentSpec* augment_spec, std::uint64_t draw_base) {
    const auto& shape0 = dataset.images[indices[begin]].shape;
    std::vector<std::size_t> batch_shape = {end - begin};
    batch_shape.insert(batch_shape.end(), shape0.begin(), shape0.end());
    nn::Tensor batch(batch_shape);
    const std::size_t stride = dataset.images[indices[begin]].size();
    for (std::size_t i = begin; i < end; ++i) {
        nn::Tensor img = dataset.images[indices[i]];
        if (augment_spec != nullptr)
            img = nn::augment(img, *augment_spec, draw_base + i);
        if (img.size() != stride)
            throw InputError("image size mismatch inside one batch");
        std::copy(img.data.begin(), img.data.end(),
                  batch.data.begin() + (i - begin) * stride);
    }
    return batch;
}

nn::Tensor gather_targets(const Dataset& dataset, const std::vector<std::size_t>& indices,
                          std::size_t begin, std::size_t end) {
    const std::size_t dim = dataset.targets.shape[1];
    nn::Tensor t({end - begin, dim});
    for (std::size_t i = begin; i < end; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            t.at2(i - begin, j) = dataset.targets.at2(indices[i], j);
    return t;
}

}  // namespace

TrainResult train(const Dataset& dataset, const nn::Network& start,
                  const TrainConfig& config) {
    if (dataset.train_indices.empty())
        throw InputError("dataset has no train split; call split() first");
    config.sgd.validate();
    config.augment.validate();
    if (dataset.targets.shape.size() != 2 ||
        dataset.targets.shape[1] != start.output_dim())
        throw InputError("target dimension does not match network output");

    TrainResult result;
    result.net = start;
    if (config.warm_start_output_bias && config.epochs > 0) {
        for (std::size_t li = result.net.layers.size(); li-- > 0;) {
            if (result.net.spec.layers[li].kind != nn::LayerKind::Fc) continue;
            nn::Tensor& bias = result.net.layers[li].bias;
            for (std::size_t j = 0; j < bias.size(); ++j) {
                double mean = 0.0;
                for (std::size_t idx : dataset.train_indices)
                    mean += dataset.targets.at2(idx, j);
                bias[j] = mean / static_cast<double>(dataset.train_indices.size());
            }
            break;
        }
    }
    std::uint64_t iteration = 0;
    std::uint64_t draw = 0;
    nn::AugmentSpec aug = config.augment;
    aug.seed = derive_seed(config.seed, "train.augment");
    const bool augment_on =
        aug.horizontal_flip || aug.vertical_flip || !aug.rotations.empty();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order = dataset.train_indices;
        Rng shuffle_rng(derive_seed(config.seed, "train.epoch", epoch));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t sample_count = 0;
        for (std::size_t begin = 0; begin < order.size();
             begin += config.sgd.batch_size) {
            const std::size_t end =
                std::min(begin + config.sgd.batch_size, order.size());
            const nn::Tensor batch = gather_batch(
                dataset, order, begin, end, augment_on ? &aug : nullptr, draw);
            const nn::Tensor targets = gather_targets(dataset, order, begin, end);
            draw += end - begin;

            nn::ForwardCache cache;
            Rng dropout_rng(derive_seed(config.seed, "train.dropout", iteration));
            const nn::Tensor pred = nn::forward_cached(result.net, batch, cache,
                                                       /*training=*/true, &dropout_rng);
            const nn::LossResult loss = nn::euclidean_loss(pred, targets);
            if (!std::isfinite(loss.value))
                throw NumericError("training loss became non-finite at iteration " +
                                   std::to_string(iteration));
            loss_sum += loss.value * static_cast<double>(end - begin);
            sample_count += end - begin;

            const nn::Gradients grads = nn::backward(result.net, cache, loss.grad);
            nn::sgd_step(result.net, grads, config.sgd, iteration);
            ++iteration;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(sample_count));
    }
    return result;
}

nn::Tensor predict_all(const nn::Network& net, const Dataset& dataset,
                       const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw InputError("no samples to predict");
    const std::size_t dim = net.output_dim();
    nn::Tensor out({indices.size(), dim});
    constexpr std::size_t kEvalBatch = 64;
    for (std::size_t begin = 0; begin < indices.size(); begin += kEvalBatch) {
        const std::size_t end = std::min(begin + kEvalBatch, indices.size());
        const nn::Tensor batch = gather_batch(dataset, indices, begin, end, nullptr, 0);
        const nn::Tensor pred = nn::forward(net, batch);
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                out.at2(i, j) = pred.at2(i - begin, j);
    }
    return out;
}

double evaluate_loss(const nn::Network& net, const Dataset& dataset,
                     const std::vector<std::size_t>& indices) {
    const nn::Tensor pred = predict_all(net, dataset, indices);
    nn::Tensor targets({indices.size(), dataset.targets.shape[1]});
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t j = 0; j < dataset.targets.shape[1]; ++j)
            targets.at2(i, j) = dataset.targets.at2(indices[i], j);
    return nn::euclidean_loss(pred, targets).value;
}

R2Report evaluate_r2(const nn::Network& net, const Dataset& dataset,
                     const std::vector<std::size_t>& indices) {
    const nn::Tensor pred = predict_all(net, dataset, indices);
    nn::Tensor targets({indices.size(), dataset.targets.shape[1]});
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t j = 0; j < dataset.targets.shape[1]; ++j)
            targets.at2(i, j) = dataset.targets.at2(indices[i], j);
    return r2_score(pred, targets);
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, "placebo.permutation"));
    rng.shuffle(perm);
    return perm;
}

Dataset permute_targets(const Dataset& dataset, const std::vector<std::size_t>& perm) {
    if (perm.size() != dataset.size())
        throw InputError("permutation length does not match dataset size");
    Dataset out = dataset;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = 0; j < dataset.targets.shape[1]; ++j)
            out.targets.at2(i, j) = dataset.targets.at2(perm[i], j);
    return out;
}

R2Report placebo_check(const Dataset& dataset, const nn::Network& start,
                       const TrainConfig& config, std::uint64_t shuffle_seed) {
    const Dataset shuffled =
        permute_targets(dataset, random_permutation(dataset.size(), shuffle_seed));
    const TrainResult trained = train(shuffled, start, config);
    return evaluate_r2(trained.net, shuffled, shuffled.test_indices);
}

census::OutlierReport reject_train_outliers(Dataset& dataset, double threshold,
                                            double ridge_scale) {
    const std::size_t dim = dataset.targets.shape[1];
    if (dim != census::kIndicatorCount)
        throw InputError("outlier rejection expects 16-dim asset targets");
    std::vector<census::AssetVector> train_vectors(dataset.train_indices.size());
    for (std::size_t i = 0; i < dataset.train_indices.size(); ++i) {
        train_vectors[i].village_id = std::to_string(dataset.train_indices[i]);
        for (std::size_t j = 0; j < dim; ++j)
            train_vectors[i].values[j] = dataset.targets.at2(dataset.train_indices[i], j);
    }
    const census::OutlierReport report =
        census::mahalanobis_filter(train_vectors, threshold, ridge_scale);
    std::vector<std::size_t> kept;
    kept.reserve(dataset.train_indices.size());
    for (std::size_t i = 0; i < dataset.train_indices.size(); ++i)
        if (!report.rejected[i]) kept.push_back(dataset.train_indices[i]);
    dataset.train_indices = std::move(kept);
    return report;
}

std::pair<nn::Network, R2Report> train_nightlight(const std::vector<NightCell>& cells,
                                                  const std::vector<nn::Tensor>& images,
                                                  const nn::NetworkSpec& net_spec,
                                                  const TrainConfig& config,
                                                  std::uint64_t init_seed,
                                                  double train_fraction) {
    if (cells.empty()) throw InputError("no night cells");
    Dataset ds;
    ds.images.reserve(cells.size());
    ds.targets = nn::Tensor({cells.size(), 1});
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].image_index >= images.size())
            throw InputError("night cell " + cells[i].cell_id +
                             " references a missing image");
        ds.images.push_back(images[cells[i].image_index]);
        ds.targets.at2(i, 0) = static_cast<double>(cells[i].intensity);
    }
    split(ds, train_fraction, derive_seed(config.seed, "nightlight.split"));
    nn::Network net = nn::init_network(net_spec, init_seed);
    const TrainResult trained = train(ds, net, config);
    const R2Report report = evaluate_r2(trained.net, ds, ds.test_indices);
    return {trained.net, report};
}

census::AssetVector predict_village(const nn::Network& net,
                                    const std::vector<nn::Tensor>& tiles,
                                    PredictMode mode) {
    if (net.output_dim() != census::kIndicatorCount)
        throw InputError("predict_village needs a 16-output network");
    const std::size_t expected = mode == PredictMode::Single ? 1 : 4;
    if (tiles.size() != expected)
        throw InputError("predict_village: expected " + std::to_string(expected) +
                         " tiles, got " + std::to_string(tiles.size()));
    census::AssetVector out;
    for (const nn::Tensor& tile : tiles) {
        std::vector<std::size_t> batch_shape = {1};
        batch_shape.insert(batch_shape.end(), tile.shape.begin(), tile.shape.end());
        const nn::Tensor pred =
            nn::forward(net, nn::Tensor(batch_shape, tile.data));
        for (std::size_t j = 0; j < census::kIndicatorCount; ++j)
            out.values[j] += pred.at2(0, j);
    }
    for (double& v : out.values) v /= static_cast<double>(tiles.size());
    return out;
}

}  // namespace assetlens::pipeline
