#include "assetlens/transfer/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"
#include "assetlens/pipeline/train.hpp"

namespace assetlens::transfer {

FeatureVector extract_features(const nn::Network& net,
                               const std::vector<nn::Tensor>& tiles) {
    if (tiles.size() != 1 && tiles.size() != 4)
        throw InputError("extract_features expects 1 or 4 tiles, got " +
                         std::to_string(tiles.size()));
    const std::size_t feature_layer = nn::penultimate_feature_layer(net);
    FeatureVector out;
    for (const nn::Tensor& tile : tiles) {
        std::vector<std::size_t> batch_shape = {1};
        batch_shape.insert(batch_shape.end(), tile.shape.begin(), tile.shape.end());
        nn::ForwardCache cache;
        nn::forward_cached(net, nn::Tensor(batch_shape, tile.data), cache);
        const nn::Tensor& acts = cache.acts[feature_layer];  // input to the final fc
        if (out.values.empty()) out.values.assign(acts.size(), 0.0);
        for (std::size_t i = 0; i < acts.size(); ++i) out.values[i] += acts[i];
    }
    for (double& v : out.values) v /= static_cast<double>(tiles.size());
    return out;
}

nn::Tensor extract_features_batch(const nn::Network& net,
                                  const std::vector<nn::Tensor>& images) {
    if (images.empty()) throw InputError("no images to extract features from");
    const std::size_t feature_layer = nn::penultimate_feature_layer(net);
    const std::size_t width = net.spec.layers[feature_layer].in_dim;
    nn::Tensor out({images.size(), width});
    constexpr std::size_t kEvalBatch = 64;
    for (std::size_t begin = 0; begin < images.size(); begin += kEvalBatch) {
        const std::size_t end = std::min(begin + kEvalBatch, images.size());
        std::vector<std::size_t> batch_shape = {end - begin};
        batch_shape.insert(batch_shape.end(), images[begin].shape.begin(),
                           images[begin].shape.end());
        nn::Tensor batch(batch_shape);
        const std::size_t stride = images[begin].size();
        for (std::size_t i = begin; i < end; ++i)
            std::copy(images[i].data.begin(), images[i].data.end(),
                      batch.data.begin() + (i - begin) * stride);
        nn::ForwardCache cache;
        nn::forward_cached(net, batch, cache);
        const nn::Tensor& acts = cache.acts[feature_layer];
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < width; ++j)
                out.at2(i, j) = acts.at2(i - begin, j);
    }
    return out;
}

void HeadConfig::validate() const {
    if (layer_count != 1 && layer_count != 2)
        throw ConfigError("head layer_count must be 1 or 2");
    if (layer_count == 2 && hidden_width < 1)
        throw ConfigError("head hidden_width must be >= 1");
    sgd.validate();
}

nn::Network fit_head(const nn::Tensor& features, const nn::Tensor& targets,
                     const HeadConfig& config) {
    config.validate();
    if (features.shape.size() != 2 || targets.shape.size() != 2)
        throw InputError("fit_head expects (N,F) features and (N,T) targets");
    if (features.shape[0] != targets.shape[0])
        throw InputError("feature and target row counts differ");
    if (features.shape[0] < 10)
        throw InputError("fit_head needs at least 10 samples");

    const std::size_t f = features.shape[1];
    const std::size_t t = targets.shape[1];
    nn::NetworkSpec spec;
    spec.input_shape = {f};
    if (config.layer_count == 1) {
        spec.layers.push_back(nn::LayerSpec::fc(f, t));
    } else {
        spec.layers.push_back(nn::LayerSpec::fc(f, config.hidden_width));
        spec.layers.push_back(nn::LayerSpec::relu());
        spec.layers.push_back(nn::LayerSpec::fc(config.hidden_width, t));
    }
    nn::Network net = nn::init_network(spec, derive_seed(config.seed, "head.init"));

    pipeline::Dataset ds;
    ds.images.reserve(features.shape[0]);
    for (std::size_t i = 0; i < features.shape[0]; ++i) {
        nn::Tensor row({f});
        for (std::size_t j = 0; j < f; ++j) row[j] = features.at2(i, j);
        ds.images.push_back(std::move(row));
    }
    ds.targets = targets;
    ds.train_indices.resize(features.shape[0]);
    std::iota(ds.train_indices.begin(), ds.train_indices.end(), 0);

    pipeline::TrainConfig tc;
    tc.sgd = config.sgd;
    tc.epochs = config.epochs;
    tc.seed = derive_seed(config.seed, "head.train");
    return pipeline::train(ds, net, tc).net;
}

nn::Tensor head_predict(const nn::Network& head, const nn::Tensor& features) {
    return nn::forward(head, features);
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k,
                                         std::uint64_t seed) {
    if (k < 2) throw InputError("crossval needs k >= 2");
    if (n < k) throw InputError("crossval needs at least k samples");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "crossval.folds"));
    rng.shuffle(order);
    // Contiguous chunks of the shuffled order; sizes differ by at most one.
    std::vector<std::size_t> fold(n);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t fi = 0; fi < k; ++fi) {
        const std::size_t len = base + (fi < extra ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) fold[order[pos++]] = fi;
    }
    return fold;
}

CrossvalReport crossval(const nn::Tensor& features, const nn::Tensor& targets,
                        std::size_t k, const HeadConfig& config,
                        std::uint64_t fold_seed) {
    const std::size_t n = features.shape[0];
    const std::vector<std::size_t> fold = fold_assignment(n, k, fold_seed);

    CrossvalReport report;
    report.folds = k;
    nn::Tensor pooled_pred({n, targets.shape[1]});
    double sum_overall = 0.0;
    std::size_t defined_folds = 0;
    bool have_best = false;
    for (std::size_t fi = 0; fi < k; ++fi) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < n; ++i)
            (fold[i] == fi ? test_rows : train_rows).push_back(i);

        nn::Tensor train_x({train_rows.size(), features.shape[1]});
        nn::Tensor train_y({train_rows.size(), targets.shape[1]});
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            for (std::size_t j = 0; j < features.shape[1]; ++j)
                train_x.at2(i, j) = features.at2(train_rows[i], j);
            for (std::size_t j = 0; j < targets.shape[1]; ++j)
                train_y.at2(i, j) = targets.at2(train_rows[i], j);
        }
        HeadConfig fold_config = config;
        fold_config.seed = derive_seed(config.seed, "crossval.fold", fi);
        const nn::Network head = fit_head(train_x, train_y, fold_config);

        nn::Tensor test_x({test_rows.size(), features.shape[1]});
        nn::Tensor test_y({test_rows.size(), targets.shape[1]});
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            for (std::size_t j = 0; j < features.shape[1]; ++j)
                test_x.at2(i, j) = features.at2(test_rows[i], j);
            for (std::size_t j = 0; j < targets.shape[1]; ++j)
                test_y.at2(i, j) = targets.at2(test_rows[i], j);
        }
        const nn::Tensor pred = head_predict(head, test_x);
        for (std::size_t i = 0; i < test_rows.size(); ++i)
            for (std::size_t j = 0; j < targets.shape[1]; ++j)
                pooled_pred.at2(test_rows[i], j) = pred.at2(i, j);

        if (test_rows.size() >= 2) {
            pipeline::R2Report fold_report = pipeline::r2_score(pred, test_y);
            sum_overall += fold_report.overall;
            ++defined_folds;
            if (!have_best || fold_report.overall > report.best_overall) {
                report.best_overall = fold_report.overall;
                have_best = true;
            }
            report.per_fold.push_back(std::move(fold_report));
        } else {
            report.per_fold.emplace_back();
        }
    }
    report.pooled = pipeline::r2_score(pooled_pred, targets);
    report.mean_overall =
        defined_folds > 0 ? sum_overall / static_cast<double>(defined_folds)
                          : report.pooled.overall;
    if (!have_best) report.best_overall = report.pooled.overall;
    return report;
}

std::vector<DistrictRecord> aggregate_district(
    const std::vector<census::AssetVector>& predictions,
    const std::map<std::string, std::string>& village_to_district) {
    std::map<std::string, DistrictRecord> records;
    for (const census::AssetVector& p : predictions) {
        const auto it = village_to_district.find(p.village_id);
        if (it == village_to_district.end())
            throw InputError("village " + p.village_id + " has no district mapping");
        DistrictRecord& rec = records[it->second];
        rec.district_id = it->second;
        rec.village_ids.push_back(p.village_id);
        for (std::size_t k = 0; k < census::kIndicatorCount; ++k)
            rec.mean_prediction[k] += p.values[k];
    }
    std::vector<DistrictRecord> out;
    out.reserve(records.size());
    for (auto& [id, rec] : records) {
        for (double& v : rec.mean_prediction)
            v /= static_cast<double>(rec.village_ids.size());
        out.push_back(std::move(rec));
    }
    return out;
}

std::pair<std::vector<std::string>, nn::Tensor> mean_by_district(
    const nn::Tensor& features, const std::vector<std::string>& district_ids) {
    if (features.shape.size() != 2 || features.shape[0] != district_ids.size())
        throw InputError("feature rows do not match district id count");
    std::set<std::string> unique(district_ids.begin(), district_ids.end());
    std::vector<std::string> districts(unique.begin(), unique.end());
    nn::Tensor means({districts.size(), features.shape[1]});
    std::vector<std::size_t> counts(districts.size(), 0);
    for (std::size_t i = 0; i < district_ids.size(); ++i) {
        const std::size_t d = static_cast<std::size_t>(
            std::lower_bound(districts.begin(), districts.end(), district_ids[i]) -
            districts.begin());
        for (std::size_t j = 0; j < features.shape[1]; ++j)
            means.at2(d, j) += features.at2(i, j);
        ++counts[d];
    }
    for (std::size_t d = 0; d < districts.size(); ++d)
        for (std::size_t j = 0; j < features.shape[1]; ++j)
            means.at2(d, j) /= static_cast<double>(counts[d]);
    return {std::move(districts), std::move(means)};
}

SweepResult indicator_sweep(const nn::Tensor& features,
                            const std::vector<std::string>& indicator_names,
                            const nn::Tensor& indicator_table, std::size_t k,
                            const HeadConfig& config, std::uint64_t fold_seed) {
    if (indicator_table.shape.size() != 2 ||
        indicator_table.shape[1] != indicator_names.size())
        throw InputError("indicator table does not match indicator names");
    if (indicator_table.shape[0] != features.shape[0])
        throw InputError("indicator table rows do not match feature rows");
    for (std::size_t i = 0; i < indicator_table.size(); ++i)
        if (!std::isfinite(indicator_table[i]))
            throw InputError("indicator table has missing or non-finite entries");

    SweepResult result;
    result.indicator_names = indicator_names;
    for (double e = -1.0; e < 1.0 + 1e-9; e += 0.1)
        result.bin_edges.push_back(e);
    result.histogram.assign(result.bin_edges.size() - 1, 0);

    const std::size_t n = features.shape[0];
    for (std::size_t j = 0; j < indicator_names.size(); ++j) {
        nn::Tensor target({n, 1});
        for (std::size_t i = 0; i < n; ++i) target.at2(i, 0) = indicator_table.at2(i, j);
        HeadConfig per_indicator = config;
        per_indicator.seed = derive_seed(config.seed, "sweep", j);
        const CrossvalReport report =
            crossval(features, target, k, per_indicator, fold_seed);
        const double r2 = report.pooled.overall;
        result.r2.push_back(r2);
        // R^2 below -1 lands in the first bin, 1.0 in the last.
        double clamped = std::clamp(r2, -1.0, 1.0 - 1e-12);
        const std::size_t bin = static_cast<std::size_t>((clamped + 1.0) / 0.1);
        ++result.histogram[std::min(bin, result.histogram.size() - 1)];
    }
    return result;
}

}  // namespace assetlens::transfer
