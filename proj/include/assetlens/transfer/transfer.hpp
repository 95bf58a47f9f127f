#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "assetlens/census/census.hpp"
#include "assetlens/nn/network.hpp"
#include "assetlens/nn/sgd.hpp"
#include "assetlens/pipeline/stats.hpp"

namespace assetlens::transfer {

struct FeatureVector {
    std::string village_id;
    std::vector<double> values;
};

// Penultimate-layer activations for one village; 4-tile mode averages the
// per-tile features. Throws ConfigError when the network has no hidden fc
// layer in front of the output.
FeatureVector extract_features(const nn::Network& net,
                               const std::vector<nn::Tensor>& tiles);

// Feature matrix (N, F) for a batch of single images.
nn::Tensor extract_features_batch(const nn::Network& net,
                                  const std::vector<nn::Tensor>& images);

// Small regression head on top of fixed features: one linear layer, or
// fc -> relu -> fc when layer_count is 2.
struct HeadConfig {
    std::size_t layer_count = 1;  // 1 or 2
    std::size_t hidden_width = 32;
    nn::SgdConfig sgd;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

nn::Network fit_head(const nn::Tensor& features, const nn::Tensor& targets,
                     const HeadConfig& config);

nn::Tensor head_predict(const nn::Network& head, const nn::Tensor& features);

struct CrossvalReport {
    std::vector<pipeline::R2Report> per_fold;  // folds of size 1 have no R^2
    pipeline::R2Report pooled;                 // over all out-of-fold predictions
    double mean_overall = 0.0;                 // mean of defined per-fold overalls
    double best_overall = 0.0;
    std::size_t folds = 0;
};

// Seeded k-fold cross validation of a head on (features, targets).
CrossvalReport crossval(const nn::Tensor& features, const nn::Tensor& targets,
                        std::size_t k, const HeadConfig& config,
                        std::uint64_t fold_seed);

// Deterministic fold assignment: returns fold index per sample.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k,
                                         std::uint64_t seed);

struct DistrictRecord {
    std::string district_id;
    std::vector<std::string> village_ids;
    std::array<double, census::kIndicatorCount> mean_prediction{};
};

// Arithmetic mean of village predictions per district. Throws InputError
// naming any village missing from the mapping.
std::vector<DistrictRecord> aggregate_district(
    const std::vector<census::AssetVector>& predictions,
    const std::map<std::string, std::string>& village_to_district);

// Group mean of arbitrary-width feature rows by district id; districts come
// back sorted. Used to build district-level design matrices.
std::pair<std::vector<std::string>, nn::Tensor> mean_by_district(
    const nn::Tensor& features, const std::vector<std::string>& district_ids);

struct SweepResult {
    std::vector<std::string> indicator_names;
    std::vector<double> r2;                // pooled out-of-fold R^2 per indicator
    std::vector<std::size_t> histogram;    // bin counts; first bin catches R^2 < -1
    std::vector<double> bin_edges;         // histogram edges, -1..1 step 0.1
};

// Cross-validates one head per indicator column and bins the R^2 scores.
SweepResult indicator_sweep(const nn::Tensor& features,
                            const std::vector<std::string>& indicator_names,
                            const nn::Tensor& indicator_table, std::size_t k,
                            const HeadConfig& config, std::uint64_t fold_seed);

}  // namespace assetlens::transfer
