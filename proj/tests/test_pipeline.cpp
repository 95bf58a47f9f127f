#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"
#include "assetlens/pipeline/dataset.hpp"
#include "assetlens/pipeline/stats.hpp"
#include "assetlens/pipeline/synth.hpp"
#include "assetlens/pipeline/train.hpp"

using namespace assetlens;
using namespace assetlens::pipeline;

namespace {

// Small training setup used by the planted-relation tests.
TrainConfig quick_train_config(std::size_t epochs, std::size_t n_train,
                               std::uint64_t seed) {
    TrainConfig tc;
    tc.sgd.learning_rate = 1e-6;
    tc.sgd.gamma = 0.5;
    tc.sgd.momentum = 0.8;
    tc.sgd.weight_decay = 0.005;
    tc.sgd.batch_size = 32;
    tc.sgd.step_interval =
        std::max<std::size_t>(1, 10 * ((n_train + 31) / 32));
    tc.epochs = epochs;
    tc.seed = seed;
    return tc;
}

}  // namespace

TEST_CASE("skewness: symmetric, spiked, mirrored") {
    CHECK(skewness({-1.0, 0.0, 1.0}) == doctest::Approx(0.0));
    CHECK(skewness({0.0, 0.0, 0.0, 1.0}) ==
          doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
    Rng rng(3);
    std::vector<double> data(200), mirrored(200);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = rng.next_double() * rng.next_double() * 10.0;
        mirrored[i] = -data[i];
    }
    CHECK(skewness(mirrored) == doctest::Approx(-skewness(data)).epsilon(1e-10));
    CHECK_THROWS_AS(skewness({1.0, 1.0, 1.0}), InputError);
    CHECK_THROWS_AS(skewness({1.0, 2.0}), InputError);
}

TEST_CASE("undersample_skew reduces a zero-inflated distribution to the target") {
    // Half zeros, a short geometric bulk, and a sparse far tail: the
    // night-light histogram shape, with heavy right skew.
    Rng rng(11);
    std::vector<NightCell> cells;
    for (std::size_t i = 0; i < 4000; ++i) {
        NightCell c;
        c.cell_id = "c" + std::to_string(i);
        c.image_index = i;
        const double u = rng.next_double();
        if (u < 0.50)
            c.intensity = 0;
        else if (u < 0.95)
            c.intensity = std::clamp(
                1 + static_cast<int>(std::floor(-2.0 * std::log(1.0 - rng.next_double()))),
                1, 8);
        else
            c.intensity = 30 + static_cast<int>(rng.next_below(34));
        cells.push_back(c);
    }
    std::vector<double> values;
    for (const auto& c : cells) values.push_back(c.intensity);
    const double initial = skewness(values);
    CHECK(initial > 3.0);

    const auto kept = undersample_skew(cells, 0.4, 99);
    std::vector<double> kept_values;
    for (const auto& c : kept) kept_values.push_back(c.intensity);
    CHECK(skewness(kept_values) <= 0.4);
    CHECK(kept.size() < cells.size());
    CHECK(kept.size() >= 3);

    // Determinism: identical subset per seed.
    const auto again = undersample_skew(cells, 0.4, 99);
    REQUIRE(again.size() == kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        CHECK(again[i].cell_id == kept[i].cell_id);

    // Already at target: unchanged.
    std::vector<NightCell> flat;
    for (int i = 0; i < 10; ++i)
        flat.push_back({"f" + std::to_string(i), i % 5, 0});
    const double flat_skew = skewness({0, 1, 2, 3, 4, 0, 1, 2, 3, 4});
    const auto same = undersample_skew(flat, flat_skew + 0.1, 1);
    CHECK(same.size() == flat.size());
}

TEST_CASE("undersample_skew fails explicitly when the target is unreachable") {
    std::vector<NightCell> cells;
    for (int i = 0; i < 5; ++i) cells.push_back({"a" + std::to_string(i), 0, 0});
    for (int i = 0; i < 5; ++i) cells.push_back({"b" + std::to_string(i), 1, 0});
    CHECK_THROWS_WITH_AS(undersample_skew(cells, -5.0, 7),
                         doctest::Contains("best achieved"), InputError);
}

TEST_CASE("split: deterministic, disjoint, exhaustive, sized") {
    Dataset ds;
    for (std::size_t i = 0; i < 103; ++i) ds.images.emplace_back(std::vector<std::size_t>{1});
    ds.targets = nn::Tensor({103, 1});
    split(ds, 0.8, 5);
    CHECK(ds.train_indices.size() == 82);  // round(0.8 * 103)
    CHECK(ds.test_indices.size() == 21);

    std::set<std::size_t> all(ds.train_indices.begin(), ds.train_indices.end());
    all.insert(ds.test_indices.begin(), ds.test_indices.end());
    CHECK(all.size() == 103);

    Dataset ds2;
    for (std::size_t i = 0; i < 103; ++i) ds2.images.emplace_back(std::vector<std::size_t>{1});
    ds2.targets = nn::Tensor({103, 1});
    split(ds2, 0.8, 5);
    CHECK(ds2.train_indices == ds.train_indices);
    split(ds2, 0.8, 6);
    CHECK(ds2.train_indices != ds.train_indices);
}

TEST_CASE("r2_score formula and undefined indicators") {
    SUBCASE("perfect prediction") {
        nn::Tensor y({3, 2}, {1, 2, 3, 4, 5, 6});
        const R2Report r = r2_score(y, y);
        CHECK(r.per_indicator[0] == doctest::Approx(1.0));
        CHECK(r.per_indicator[1] == doctest::Approx(1.0));
        CHECK(r.overall == doctest::Approx(1.0));
    }
    SUBCASE("column-mean prediction scores zero") {
        nn::Tensor y({4, 1}, {1, 2, 3, 4});
        nn::Tensor pred({4, 1}, {2.5, 2.5, 2.5, 2.5});
        CHECK(r2_score(pred, y).per_indicator[0] == doctest::Approx(0.0));
    }
    SUBCASE("worked example: 1 - 1/2") {
        nn::Tensor y({3, 1}, {1, 2, 3});
        nn::Tensor pred({3, 1}, {1, 2, 4});
        CHECK(r2_score(pred, y).per_indicator[0] == doctest::Approx(0.5));
    }
    SUBCASE("constant target column is excluded from the weighted overall") {
        nn::Tensor y({3, 2}, {1, 7, 2, 7, 3, 7});
        nn::Tensor pred({3, 2}, {1, 0, 2, 0, 4, 0});
        const R2Report r = r2_score(pred, y);
        CHECK(r.defined[0]);
        CHECK_FALSE(r.defined[1]);
        CHECK(std::isnan(r.per_indicator[1]));
        CHECK(r.overall == doctest::Approx(0.5));
    }
    SUBCASE("variance-weighted overall") {
        // Column 0: var 2/3, R2 0.5; column 1: var 8/3 (2x scale), R2 1.
        nn::Tensor y({3, 2}, {1, 2, 2, 4, 3, 6});
        nn::Tensor pred({3, 2}, {1, 2, 2, 4, 4, 6});
        const R2Report r = r2_score(pred, y);
        const double v0 = 2.0 / 3.0, v1 = 8.0 / 3.0;
        CHECK(r.overall ==
              doctest::Approx((v0 * 0.5 + v1 * 1.0) / (v0 + v1)).epsilon(1e-12));
    }
}

TEST_CASE("synth_generate: deterministic, planted outliers, affine structure") {
    SynthConfig cfg;
    cfg.village_count = 60;
    cfg.image_size = 32;
    cfg.noise_level = 0.0;
    cfg.outlier_fraction = 0.1;
    cfg.seed = 17;

    const SynthWorld a = synth_generate(cfg);
    const SynthWorld b = synth_generate(cfg);
    REQUIRE(a.images.size() == 60);
    CHECK(a.latent == b.latent);
    for (std::size_t v = 0; v < a.images.size(); ++v)
        CHECK(a.images[v].data == b.images[v].data);
    for (std::size_t v = 0; v < a.rows.size(); ++v)
        CHECK(a.rows[v].columns == b.rows[v].columns);

    CHECK(std::count(a.corrupted.begin(), a.corrupted.end(), true) == 6);

    // Pixel counts: bright blocks occupy exactly builtup_pixels pixels.
    for (std::size_t v = 0; v < a.images.size(); ++v) {
        std::size_t bright = 0;
        for (double px : a.images[v].data)
            if (px > 100.0) ++bright;
        CHECK(bright == a.builtup_pixels[v]);
    }
}

TEST_CASE("noise-free linear world: assets are an exact affine map of built-up pixels") {
    SynthConfig cfg;
    cfg.village_count = 80;
    cfg.image_size = 32;
    cfg.relation = Relation::Linear;
    cfg.noise_level = 0.0;
    cfg.seed = 23;
    const SynthWorld world = synth_generate(cfg);

    // Fit slope/intercept per indicator from two villages with distinct
    // built-up mass, then every other village must match exactly.
    std::size_t i0 = 0, i1 = 1;
    while (world.builtup_pixels[i1] == world.builtup_pixels[i0]) ++i1;
    const census::AssetVector a0 = census::aggregate_assets(world.rows[i0]);
    const census::AssetVector a1 = census::aggregate_assets(world.rows[i1]);
    const double b0 = static_cast<double>(world.builtup_pixels[i0]);
    const double b1 = static_cast<double>(world.builtup_pixels[i1]);
    for (std::size_t k = 0; k < census::kIndicatorCount; ++k) {
        const double slope = (a1[k] - a0[k]) / (b1 - b0);
        const double intercept = a0[k] - slope * b0;
        for (std::size_t v = 0; v < world.rows.size(); ++v) {
            const double expected =
                intercept + slope * static_cast<double>(world.builtup_pixels[v]);
            const double actual = census::aggregate_assets(world.rows[v])[k];
            CHECK(actual == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("train: zero epochs change nothing; seeds reproduce loss curves") {
    SynthConfig cfg;
    cfg.village_count = 48;
    cfg.image_size = 16;
    cfg.seed = 3;
    const SynthWorld world = synth_generate(cfg);
    Dataset ds = make_dataset(world);
    split(ds, 0.8, 7);

    const nn::NetworkSpec spec = nn::micro_net_spec(16, 16, 32);
    const nn::Network start = nn::init_network(spec, 5);

    TrainConfig zero = quick_train_config(0, ds.train_indices.size(), 1);
    const TrainResult unchanged = train(ds, start, zero);
    CHECK(unchanged.epoch_loss.empty());
    for (std::size_t li = 0; li < start.layers.size(); ++li)
        CHECK(unchanged.net.layers[li].weights.data == start.layers[li].weights.data);

    TrainConfig tc = quick_train_config(3, ds.train_indices.size(), 2);
    const TrainResult r1 = train(ds, start, tc);
    const TrainResult r2 = train(ds, start, tc);
    CHECK(r1.epoch_loss == r2.epoch_loss);
    REQUIRE(r1.epoch_loss.size() == 3);
}

TEST_CASE("train fits a noise-free planted linear relation") {
    SynthConfig cfg;
    cfg.village_count = 160;
    cfg.image_size = 32;
    cfg.relation = Relation::Linear;
    cfg.noise_level = 0.0;
    cfg.seed = 29;
    const SynthWorld world = synth_generate(cfg);
    Dataset ds = make_dataset(world);
    split(ds, 0.8, 11);

    const nn::NetworkSpec spec = nn::micro_net_spec(32, 16, 64);
    const nn::Network start = nn::init_network(spec, 13);
    TrainConfig tc = quick_train_config(25, ds.train_indices.size(), 4);

    const double initial = evaluate_loss(start, ds, ds.train_indices);
    const TrainResult trained = train(ds, start, tc);
    const double final_loss = evaluate_loss(trained.net, ds, ds.train_indices);
    CHECK(final_loss < 0.1 * initial);
}

TEST_CASE("permute_targets with the identity equals ordinary training") {
    SynthConfig cfg;
    cfg.village_count = 40;
    cfg.image_size = 16;
    cfg.seed = 31;
    const SynthWorld world = synth_generate(cfg);
    Dataset ds = make_dataset(world);
    split(ds, 0.8, 3);

    std::vector<std::size_t> identity(ds.size());
    std::iota(identity.begin(), identity.end(), 0);
    const Dataset same = permute_targets(ds, identity);
    CHECK(same.targets.data == ds.targets.data);

    const std::vector<std::size_t> perm = random_permutation(ds.size(), 5);
    const Dataset shuffled = permute_targets(ds, perm);
    CHECK(shuffled.targets.data != ds.targets.data);
    // Row multiset preserved.
    double sum_orig = 0.0, sum_perm = 0.0;
    for (double v : ds.targets.data) sum_orig += v;
    for (double v : shuffled.targets.data) sum_perm += v;
    CHECK(sum_perm == doctest::Approx(sum_orig));
}

TEST_CASE("reject_train_outliers drops only corrupted train rows") {
    SynthConfig cfg;
    cfg.village_count = 300;
    cfg.image_size = 16;
    cfg.noise_level = 0.1;
    cfg.outlier_fraction = 0.05;
    cfg.seed = 41;
    const SynthWorld world = synth_generate(cfg);
    Dataset ds = make_dataset(world);
    split(ds, 0.8, 13);

    // Threshold below the masking ceiling sqrt(d/f) ~ 17.9: a 5% outlier
    // fraction inflates the contaminated covariance enough that no corrupted
    // row can reach distance 30.
    const std::vector<std::size_t> before = ds.train_indices;
    reject_train_outliers(ds, 8.0);
    std::set<std::size_t> kept(ds.train_indices.begin(), ds.train_indices.end());
    for (std::size_t idx : before) {
        if (world.corrupted[idx])
            CHECK(kept.count(idx) == 0);
        else
            CHECK(kept.count(idx) == 1);
    }
    // Test split untouched.
    for (std::size_t idx : ds.test_indices) CHECK(kept.count(idx) == 0);
}

TEST_CASE("predict_village tile handling") {
    const nn::NetworkSpec spec = nn::micro_net_spec(16, 16, 32);
    nn::Network net = nn::init_network(spec, 19);
    // Bump the final bias so outputs are distinct from zero.
    net.layers.back().bias.data.assign(16, 1.0);

    Rng rng(7);
    nn::Tensor tile_a({1, 16, 16}), tile_b({1, 16, 16});
    for (double& v : tile_a.data) v = 255.0 * rng.next_double();
    for (double& v : tile_b.data) v = 255.0 * rng.next_double();

    const census::AssetVector single = predict_village(net, {tile_a}, PredictMode::Single);
    const census::AssetVector same4 = predict_village(
        net, {tile_a, tile_a, tile_a, tile_a}, PredictMode::TileAverage);
    for (std::size_t k = 0; k < census::kIndicatorCount; ++k)
        CHECK(same4[k] == doctest::Approx(single[k]).epsilon(1e-12));

    const census::AssetVector b = predict_village(net, {tile_b}, PredictMode::Single);
    const census::AssetVector mixed = predict_village(
        net, {tile_a, tile_b, tile_a, tile_b}, PredictMode::TileAverage);
    const census::AssetVector mixed_perm = predict_village(
        net, {tile_b, tile_a, tile_b, tile_a}, PredictMode::TileAverage);
    for (std::size_t k = 0; k < census::kIndicatorCount; ++k) {
        CHECK(mixed[k] == doctest::Approx(0.5 * (single[k] + b[k])).epsilon(1e-12));
        CHECK(mixed_perm[k] == doctest::Approx(mixed[k]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(predict_village(net, {tile_a, tile_b}, PredictMode::TileAverage),
                    InputError);
    CHECK_THROWS_AS(predict_village(net, {tile_a, tile_b}, PredictMode::Single),
                    InputError);
}

TEST_CASE("untrained nightlight baseline scores at or below zero") {
    SynthConfig cfg;
    cfg.village_count = 60;
    cfg.image_size = 16;
    cfg.seed = 43;
    const SynthWorld world = synth_generate(cfg);

    Dataset ds;
    ds.images = world.images;
    ds.targets = nn::Tensor({world.night.size(), 1});
    for (std::size_t i = 0; i < world.night.size(); ++i)
        ds.targets.at2(i, 0) = world.night[i].intensity;
    split(ds, 0.8, 3);
    const nn::Network untrained = nn::init_network(nn::micro_net_spec(16, 1, 32), 11);
    const R2Report r = evaluate_r2(untrained, ds, ds.test_indices);
    CHECK(r.per_indicator[0] <= 0.0);
}

TEST_CASE("train_nightlight recovers the luminance relation") {
    SynthConfig cfg;
    cfg.village_count = 400;
    cfg.image_size = 32;
    cfg.relation = Relation::Linear;
    cfg.noise_level = 0.0;
    cfg.seed = 71;
    const SynthWorld world = synth_generate(cfg);

    TrainConfig tc;
    tc.sgd.learning_rate = 5e-7;
    tc.sgd.gamma = 0.2;
    tc.sgd.momentum = 0.8;
    tc.sgd.weight_decay = 0.005;
    tc.sgd.batch_size = 32;
    tc.sgd.step_interval = 8 * ((world.night.size() * 8 / 10 + 31) / 32);
    tc.epochs = 16;
    tc.seed = 5;

    const auto [net, report] = train_nightlight(
        world.night, world.images, nn::micro_net_spec(32, 1, 64), tc, 9);
    CHECK(report.per_indicator[0] >= 0.7);
}

TEST_CASE("larger context beats small context when night light spreads") {
    // Night intensity depends on the village plus its right neighbour; the
    // "2-tile mosaic" input sees both, the single tile sees only half the
    // signal.
    SynthConfig cfg;
    cfg.village_count = 400;
    cfg.image_size = 32;
    cfg.relation = Relation::Linear;
    cfg.noise_level = 0.0;
    cfg.seed = 73;
    const SynthWorld world = synth_generate(cfg);

    const std::size_t n = world.images.size();
    auto right_neighbor = [&](std::size_t v) {
        const std::size_t row = world.village_row(v);
        const std::size_t col = world.village_col(v);
        const std::size_t next = (col + 1) % world.grid_side;
        const std::size_t candidate = row * world.grid_side + next;
        return candidate < n ? candidate : row * world.grid_side;
    };

    std::vector<NightCell> cells(n);
    for (std::size_t v = 0; v < n; ++v) {
        const double combined = 0.5 * world.signal[v] + 0.5 * world.signal[right_neighbor(v)];
        cells[v].cell_id = "s" + std::to_string(v);
        cells[v].intensity = std::clamp(static_cast<int>(std::floor(63.0 * combined)), 0, 63);
        cells[v].image_index = v;
    }

    // Mosaic: own image next to the neighbour's, 2:1 column-average back to 32x32.
    std::vector<nn::Tensor> mosaics(n);
    for (std::size_t v = 0; v < n; ++v) {
        const nn::Tensor& a = world.images[v];
        const nn::Tensor& b = world.images[right_neighbor(v)];
        nn::Tensor m({1, 32, 32});
        for (std::size_t r = 0; r < 32; ++r)
            for (std::size_t c = 0; c < 32; ++c) {
                const std::size_t src = 2 * c;
                const nn::Tensor& tile = src < 32 ? a : b;
                const std::size_t c0 = src < 32 ? src : src - 32;
                m.data[r * 32 + c] =
                    0.5 * (tile.data[r * 32 + c0] + tile.data[r * 32 + c0 + 1]);
            }
        mosaics[v] = std::move(m);
    }

    TrainConfig tc;
    tc.sgd.learning_rate = 5e-7;
    tc.sgd.gamma = 0.2;
    tc.sgd.momentum = 0.8;
    tc.sgd.weight_decay = 0.005;
    tc.sgd.batch_size = 32;
    tc.sgd.step_interval = 8 * ((n * 8 / 10 + 31) / 32);
    tc.epochs = 16;
    tc.seed = 7;

    const auto [small_net, small_r2] = train_nightlight(
        cells, world.images, nn::micro_net_spec(32, 1, 64), tc, 11);
    const auto [large_net, large_r2] = train_nightlight(
        cells, mosaics, nn::micro_net_spec(32, 1, 64), tc, 11);
    CHECK(large_r2.per_indicator[0] >= small_r2.per_indicator[0]);
    CHECK(large_r2.per_indicator[0] > 0.5);
}

TEST_CASE("placebo lands near zero while the unshuffled control learns") {
    SynthConfig cfg;
    cfg.village_count = 400;
    cfg.image_size = 32;
    cfg.relation = Relation::Linear;
    cfg.noise_level = 0.05;
    cfg.seed = 79;
    const SynthWorld world = synth_generate(cfg);
    Dataset ds = make_dataset(world);
    split(ds, 0.8, 17);

    TrainConfig tc;
    tc.sgd.learning_rate = 5e-7;
    tc.sgd.gamma = 0.2;
    tc.sgd.momentum = 0.8;
    tc.sgd.weight_decay = 0.005;
    tc.sgd.batch_size = 32;
    tc.sgd.step_interval = 8 * ((ds.train_indices.size() + 31) / 32);
    tc.epochs = 20;
    tc.seed = 19;

    const nn::Network start = nn::init_network(nn::micro_net_spec(32, 16, 64), 21);
    const TrainResult control = train(ds, start, tc);
    const R2Report control_r2 = evaluate_r2(control.net, ds, ds.test_indices);
    CHECK(control_r2.overall >= 0.8);

    const R2Report shuffled = placebo_check(ds, start, tc, 23);
    for (std::size_t j = 0; j < shuffled.per_indicator.size(); ++j) {
        if (!shuffled.defined[j]) continue;
        CHECK(shuffled.per_indicator[j] >= -0.3);
        CHECK(shuffled.per_indicator[j] <= 0.1);
    }
}
