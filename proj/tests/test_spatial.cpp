#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"
#include "assetlens/pipeline/synth.hpp"
#include "assetlens/pipeline/train.hpp"
#include "assetlens/spatial/choropleth.hpp"
#include "assetlens/spatial/edges.hpp"
#include "assetlens/spatial/occlusion.hpp"
#include "assetlens/spatial/temporal.hpp"

using namespace assetlens;
using namespace assetlens::spatial;

namespace {

// Reference network computing the mean pixel of an NxN single-channel image.
nn::Network mean_pixel_net(std::size_t n) {
    nn::NetworkSpec spec;
    spec.input_shape = {1, n, n};
    spec.layers.push_back(nn::LayerSpec::fc(n * n, 1));
    nn::Network net = nn::init_network(spec, 0);
    const double w = 1.0 / static_cast<double>(n * n);
    std::fill(net.layers[0].weights.data.begin(), net.layers[0].weights.data.end(), w);
    net.layers[0].bias.data = {0.0};
    return net;
}

nn::Network trained_planted_net(pipeline::SynthWorld& world, std::uint64_t seed) {
    pipeline::SynthConfig cfg;
    cfg.village_count = 150;
    cfg.image_size = 32;
    cfg.noise_level = 0.0;
    cfg.seed = seed;
    world = pipeline::synth_generate(cfg);
    pipeline::Dataset ds = pipeline::make_dataset(world);
    pipeline::split(ds, 0.8, 3);
    pipeline::TrainConfig tc;
    tc.sgd.learning_rate = 1e-6;
    tc.sgd.step_interval = 200;
    tc.epochs = 10;
    tc.seed = 2;
    return pipeline::train(ds, nn::init_network(nn::micro_net_spec(32, 16, 32), 4), tc)
        .net;
}

}  // namespace

TEST_CASE("occlusion: constant image gives a constant heatmap") {
    nn::Network net = nn::init_network(nn::micro_net_spec(32, 16, 16), 11);
    nn::Tensor image({1, 32, 32});
    std::fill(image.data.begin(), image.data.end(), 77.0);
    const OcclusionHeatmap map = occlusion_heatmap(net, image, 2, 16, 8, 77.0);
    for (double v : map.values) CHECK(v == doctest::Approx(map.values[0]));
}

TEST_CASE("occlusion: mean-pixel closed form and geometry") {
    const std::size_t n = 64;
    nn::Network net = mean_pixel_net(n);
    nn::Tensor white({1, n, n});
    std::fill(white.data.begin(), white.data.end(), 1.0);

    SUBCASE("black fill on white image: 1 - occ/area everywhere") {
        const OcclusionHeatmap map = occlusion_heatmap(net, white, 0, 16, 8, 0.0);
        CHECK(map.rows == (n - 16 + 7) / 8 + 1);
        CHECK(map.cols == map.rows);
        const double expected = 1.0 - 256.0 / 4096.0;
        for (double v : map.values)
            CHECK(std::abs(v - expected) < 1e-10);
        CHECK(map.baseline == doctest::Approx(1.0));
    }
    SUBCASE("stride equal to occluder tiles the image exactly") {
        const OcclusionHeatmap map = occlusion_heatmap(net, white, 0, 16, 16, 0.0);
        CHECK(map.rows == 4);
        CHECK(map.cols == 4);
    }
    SUBCASE("source image is never mutated") {
        nn::Tensor copy = white;
        occlusion_heatmap(net, white, 0, 16, 8, 0.0);
        CHECK(white.data == copy.data);
    }
    SUBCASE("occluder larger than the image is rejected") {
        CHECK_THROWS_AS(occlusion_heatmap(net, white, 0, 65, 8, 0.0), InputError);
    }
}

TEST_CASE("occlusion localizes the built-up dip on a trained planted world") {
    pipeline::SynthWorld world;
    const nn::Network net = trained_planted_net(world, 51);

    // Village with mid-range mass so there are blocks and blank regions.
    std::size_t v = 0;
    for (std::size_t i = 0; i < world.rows.size(); ++i)
        if (world.builtup_pixels[i] > world.builtup_pixels[v] &&
            world.builtup_pixels[i] < 40 * 36)
            v = i;
    const nn::Tensor& image = world.images[v];

    // Mean fill, full stride sweep at occluder 8 on a 32x32 image.
    double fill = 0.0;
    for (double px : image.data) fill += px;
    fill /= static_cast<double>(image.size());
    const std::size_t indicator = census::kElectronics;  // grows with development
    const OcclusionHeatmap map = occlusion_heatmap(net, image, indicator, 8, 8, fill);

    // Identify the heatmap cell over the densest block region and the
    // blankest region; occluding habitation must dip the prediction more.
    double dense_value = 0.0, blank_value = 0.0;
    double best_mass = -1.0, least_mass = 1e18;
    for (std::size_t pr = 0; pr < map.rows; ++pr) {
        for (std::size_t pc = 0; pc < map.cols; ++pc) {
            double mass = 0.0;
            for (std::size_t r = pr * 8; r < pr * 8 + 8; ++r)
                for (std::size_t c = pc * 8; c < pc * 8 + 8; ++c)
                    if (image.data[r * 32 + c] > 100.0) mass += 1.0;
            if (mass > best_mass) {
                best_mass = mass;
                dense_value = map.at(pr, pc);
            }
            if (mass < least_mass) {
                least_mass = mass;
                blank_value = map.at(pr, pc);
            }
        }
    }
    REQUIRE(best_mass > least_mass);
    CHECK(dense_value < blank_value);
    CHECK(dense_value < map.baseline);
}

TEST_CASE("detect_edges: constant, step, ramp") {
    SUBCASE("constant grid has no edges at any positive threshold") {
        GeoGrid grid(6, 6);
        for (auto& v : grid.values) v = 42.0;
        const EdgeMap map = detect_edges(grid, ThresholdPolicy::fixed(1e-9));
        for (bool e : map.mask) CHECK_FALSE(e);
        for (double m : map.magnitude) CHECK(m == 0.0);
    }
    SUBCASE("two-plateau step flags exactly the boundary columns") {
        GeoGrid grid(8, 5);
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t c = 0; c < 8; ++c) grid.set(r, c, c < 4 ? 10.0 : 90.0);
        const EdgeMap map = detect_edges(grid, ThresholdPolicy::fixed(10.0));
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t c = 0; c < 8; ++c) {
                const bool boundary = (c == 3 || c == 4);
                CHECK(map.edge(r, c) == boundary);
                if (boundary) CHECK(map.at(r, c) == doctest::Approx(40.0));
            }
    }
    SUBCASE("linear ramp: uniform magnitude, 90th percentile flags nothing") {
        GeoGrid grid(10, 10);
        for (std::size_t r = 0; r < 10; ++r)
            for (std::size_t c = 0; c < 10; ++c) grid.set(r, c, 3.0 * c);
        const EdgeMap map = detect_edges(grid, ThresholdPolicy::percentile(90.0));
        for (bool e : map.mask) CHECK_FALSE(e);
        for (std::size_t r = 0; r < 10; ++r)
            for (std::size_t c = 1; c < 9; ++c)
                CHECK(map.at(r, c) == doctest::Approx(3.0));
    }
    SUBCASE("all-missing grid is rejected") {
        GeoGrid grid(3, 3);
        for (std::size_t i = 0; i < 9; ++i) grid.present[i] = false;
        CHECK_THROWS_AS(detect_edges(grid), InputError);
    }
}

TEST_CASE("detect_edges matches hand-computed central differences exactly") {
    GeoGrid grid(4, 3);
    const double values[3][4] = {
        {1.0, 5.0, 2.0, 8.0}, {3.0, 7.0, 4.0, 1.0}, {6.0, 2.0, 9.0, 5.0}};
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) grid.set(r, c, values[r][c]);
    const EdgeMap map = detect_edges(grid, ThresholdPolicy::fixed(1e9));

    auto expected = [&](std::size_t r, std::size_t c) {
        double gx, gy;
        if (c == 0)
            gx = values[r][1] - values[r][0];
        else if (c == 3)
            gx = values[r][3] - values[r][2];
        else
            gx = (values[r][c + 1] - values[r][c - 1]) / 2.0;
        if (r == 0)
            gy = values[1][c] - values[0][c];
        else if (r == 2)
            gy = values[2][c] - values[1][c];
        else
            gy = (values[r + 1][c] - values[r - 1][c]) / 2.0;
        return std::sqrt(gx * gx + gy * gy);
    };
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(map.at(r, c) == expected(r, c));
}

TEST_CASE("detect_edges invariances: constant shift and negation") {
    Rng rng(61);
    GeoGrid grid(7, 7);
    for (std::size_t i = 0; i < 49; ++i) grid.values[i] = 10.0 * rng.next_gaussian();
    grid.present[17] = false;  // one missing cell

    GeoGrid shifted = grid;
    for (auto& v : shifted.values) v += 123.0;
    GeoGrid negated = grid;
    for (auto& v : negated.values) v = -v;

    const EdgeMap base = detect_edges(grid, ThresholdPolicy::percentile(80.0));
    const EdgeMap shift = detect_edges(shifted, ThresholdPolicy::percentile(80.0));
    const EdgeMap neg = detect_edges(negated, ThresholdPolicy::percentile(80.0));
    for (std::size_t i = 0; i < base.magnitude.size(); ++i) {
        CHECK(base.magnitude[i] == doctest::Approx(shift.magnitude[i]).epsilon(1e-12));
        CHECK(base.magnitude[i] == doctest::Approx(neg.magnitude[i]).epsilon(1e-12));
    }
    CHECK(base.mask == shift.mask);
    CHECK(base.mask == neg.mask);
}

TEST_CASE("temporal_track: constant sequences, ordering, length") {
    nn::Network net = nn::init_network(nn::micro_net_spec(16, 16, 16), 5);
    Rng rng(3);
    nn::Tensor img_a({1, 16, 16}), img_b({1, 16, 16});
    for (double& v : img_a.data) v = 255.0 * rng.next_double();
    for (double& v : img_b.data) v = 255.0 * rng.next_double();

    const auto constant = temporal_track(net, {img_a, img_a, img_a});
    REQUIRE(constant.size() == 3);
    for (std::size_t k = 0; k < census::kIndicatorCount; ++k) {
        CHECK(constant[0][k] == doctest::Approx(constant[1][k]));
        CHECK(constant[1][k] == doctest::Approx(constant[2][k]));
    }

    // Elementwise: permuting the input permutes the output.
    const auto ab = temporal_track(net, {img_a, img_b});
    const auto ba = temporal_track(net, {img_b, img_a});
    for (std::size_t k = 0; k < census::kIndicatorCount; ++k) {
        CHECK(ab[0][k] == doctest::Approx(ba[1][k]));
        CHECK(ab[1][k] == doctest::Approx(ba[0][k]));
    }

    CHECK_THROWS_AS(temporal_track(net, {img_a}), InputError);
    nn::Tensor small({1, 8, 8});
    CHECK_THROWS_AS(temporal_track(net, {img_a, small}), InputError);
}

TEST_CASE("temporal_track: growth sequence trends upward for a trained net") {
    pipeline::SynthWorld world;
    const nn::Network net = trained_planted_net(world, 53);

    std::vector<double> latents;
    for (int t = 1; t <= 8; ++t) latents.push_back(static_cast<double>(t) / 8.0);
    const auto sequence = pipeline::images_for_latents(latents, 32, 53, 1234);
    const auto series = temporal_track(net, sequence);
    REQUIRE(series.size() == 8);

    std::vector<double> time, electronics;
    for (std::size_t t = 0; t < series.size(); ++t) {
        time.push_back(static_cast<double>(t));
        electronics.push_back(series[t][census::kElectronics]);
    }
    CHECK(pipeline::spearman(time, electronics) >= 0.8);
}

TEST_CASE("choropleth rasterization: known colors, sentinel, determinism") {
    GeoGrid grid(2, 2);
    grid.set(0, 0, 0.0);
    grid.set(0, 1, 1.0);
    grid.set(1, 0, 0.5);
    grid.set_missing(1, 1);

    Palette palette;
    palette.stops = {{0, 0, 0}, {255, 255, 255}};
    palette.min_value = 0.0;
    palette.max_value = 1.0;
    palette.missing = {255, 0, 255};

    const auto rgb = rasterize_choropleth(grid, palette, 1);
    REQUIRE(rgb.size() == 12);
    CHECK(rgb[0] == 0);    // (0,0) black
    CHECK(rgb[3] == 255);  // (0,1) white
    CHECK(rgb[6] == 128);  // (1,0) mid gray
    CHECK(rgb[7] == 128);
    CHECK(rgb[9] == 255);  // (1,1) sentinel
    CHECK(rgb[10] == 0);
    CHECK(rgb[11] == 255);

    const char* p1 = "choropleth_a.png";
    const char* p2 = "choropleth_b.png";
    render_choropleth(grid, palette, p1, 4);
    render_choropleth(grid, palette, p2, 4);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)),
                         std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)),
                         std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK(b1.size() > 8);
    CHECK(b1.substr(1, 3) == "PNG");
    std::remove(p1);
    std::remove(p2);
    std::remove("choropleth_a.png.legend.json");
    std::remove("choropleth_b.png.legend.json");
}
