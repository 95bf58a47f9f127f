#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "assetlens/census/census.hpp"
#include "assetlens/nn/augment.hpp"
#include "assetlens/nn/network.hpp"
#include "assetlens/nn/sgd.hpp"
#include "assetlens/pipeline/dataset.hpp"
#include "assetlens/pipeline/stats.hpp"

namespace assetlens::pipeline {

struct TrainConfig {
    nn::SgdConfig sgd;
    nn::AugmentSpec augment;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;  // batch order, dropout masks, augmentation draws

    // Start the output-layer bias at the train-target column means. With
    // fresh 0.005-scale weights the network outputs ~0, and percent-scale
    // targets otherwise produce a long unstable bias-learning phase.
    bool warm_start_output_bias = true;
};

struct TrainResult {
    nn::Network net;
    std::vector<double> epoch_loss;  // mean per-sample data loss per epoch
};

// Minibatch SGD over the dataset's train split. Deterministic per seed.
// Aborts with NumericError naming the iteration when the loss goes
// non-finite.
TrainResult train(const Dataset& dataset, const nn::Network& start,
                  const TrainConfig& config);

// Forward passes over the given sample indices (no augmentation, eval mode).
nn::Tensor predict_all(const nn::Network& net, const Dataset& dataset,
                       const std::vector<std::size_t>& indices);

// Mean Euclidean loss of the network over the given samples.
double evaluate_loss(const nn::Network& net, const Dataset& dataset,
                     const std::vector<std::size_t>& indices);

R2Report evaluate_r2(const nn::Network& net, const Dataset& dataset,
                     const std::vector<std::size_t>& indices);

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

// Targets permuted against images; split assignment is preserved.
Dataset permute_targets(const Dataset& dataset, const std::vector<std::size_t>& perm);

// Trains on label-shuffled data and reports held-out R^2 on the shuffled
// mapping. Near-zero or negative scores mean the real model is not fitting
// dataset artifacts.
R2Report placebo_check(const Dataset& dataset, const nn::Network& start,
                       const TrainConfig& config, std::uint64_t shuffle_seed);

// Drops train-split rows whose asset targets fail the Mahalanobis filter.
// The test split is untouched. Returns the filter report over the original
// train rows.
census::OutlierReport reject_train_outliers(Dataset& dataset, double threshold = 30.0,
                                            double ridge_scale = 1e-6);

// Scalar night-intensity regression: builds (image, intensity) pairs from
// the cells, splits 8:2, trains, and reports held-out R^2.
std::pair<nn::Network, R2Report> train_nightlight(const std::vector<NightCell>& cells,
                                                  const std::vector<nn::Tensor>& images,
                                                  const nn::NetworkSpec& net_spec,
                                                  const TrainConfig& config,
                                                  std::uint64_t init_seed,
                                                  double train_fraction = 0.8);

enum class PredictMode { Single, TileAverage };

// One village prediction from a single image or the mean over 4 tiles.
census::AssetVector predict_village(const nn::Network& net,
                                    const std::vector<nn::Tensor>& tiles,
                                    PredictMode mode);

}  // namespace assetlens::pipeline
