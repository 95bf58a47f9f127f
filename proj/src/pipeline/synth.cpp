#include "assetlens/pipeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"

namespace assetlens::pipeline {

namespace {

constexpr double kBackgroundPixel = 24.0;
constexpr double kBlockPixel = 200.0;
constexpr std::size_t kSlotPixels = 8;  // slot grid cell; blocks are 6x6 inside

std::size_t max_blocks(std::size_t image_size) {
    const std::size_t slots = (image_size / kSlotPixels) * (image_size / kSlotPixels);
    return slots * 3 / 4;
}

// Column model: every raw census column moves with the development signal,
// up for development-positive indicators and down for the rest. Columns not
// referenced by the aggregation table get a direction keyed on their index.
struct ColumnModel {
    double base;
    double span;
    bool positive;
};

ColumnModel column_model(std::size_t column) {
    static const std::set<std::size_t> negative_columns = [] {
        std::set<std::size_t> cols;
        const auto& table = census::aggregation_table();
        for (std::size_t k : {census::kWaterUntreated, census::kWaterNatural,
                              census::kLightOil, census::kNoAssets,
                              census::kRoomsUnder3})
            for (std::size_t column : table[k].columns) cols.insert(column);
        return cols;
    }();
    static const std::set<std::size_t> referenced_columns = [] {
        std::set<std::size_t> cols;
        for (const auto& formula : census::aggregation_table())
            for (std::size_t column : formula.columns) cols.insert(column);
        return cols;
    }();
    ColumnModel m;
    if (referenced_columns.count(column)) {
        m.base = 5.0;
        m.span = 60.0;
        m.positive = negative_columns.count(column) == 0;
    } else {
        // Unreferenced columns still correlate with development so the
        // 140x16 correlation diagnostic has structure.
        m.base = 15.0;
        m.span = 30.0;
        m.positive = (column % 3) != 0;
    }
    return m;
}

double relation_value(Relation relation, double s) {
    switch (relation) {
        case Relation::Linear: return s;
        case Relation::MonotoneNonlinear: return s * s;
    }
    return s;
}

nn::Tensor render_image(std::size_t image_size, std::size_t blocks, Rng& rng) {
    const std::size_t per_side = image_size / kSlotPixels;
    const std::size_t slots = per_side * per_side;
    std::vector<std::size_t> order(slots);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    nn::Tensor img({1, image_size, image_size});
    std::fill(img.data.begin(), img.data.end(), kBackgroundPixel);
    for (std::size_t b = 0; b < blocks && b < slots; ++b) {
        const std::size_t slot = order[b];
        const std::size_t r0 = (slot / per_side) * kSlotPixels + 1;
        const std::size_t c0 = (slot % per_side) * kSlotPixels + 1;
        for (std::size_t r = r0; r < r0 + 6; ++r)
            for (std::size_t c = c0; c < c0 + 6; ++c)
                img.data[r * image_size + c] = kBlockPixel;
    }
    return img;
}

int quantize_night(double s) {
    const double g = std::max(0.0, (s - 0.5) / 0.5);
    return std::clamp(static_cast<int>(std::floor(64.0 * g)), 0, 63);
}

}  // namespace

void SynthConfig::validate() const {
    if (village_count < 1) throw ConfigError("village_count must be >= 1");
    if (image_size % 8 != 0 || image_size < 16)
        throw ConfigError("image_size must be a multiple of 8, >= 16");
    if (!(noise_level >= 0.0)) throw ConfigError("noise_level must be >= 0");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 0.5))
        throw ConfigError("outlier_fraction must be in [0, 0.5)");
    if (district_side < 1) throw ConfigError("district_side must be >= 1");
}

std::vector<nn::Tensor> images_for_latents(const std::vector<double>& latents,
                                           std::size_t image_size, std::uint64_t seed,
                                           std::uint64_t village_tag) {
    const std::size_t mb = max_blocks(image_size);
    std::vector<nn::Tensor> images;
    images.reserve(latents.size());
    for (double z : latents) {
        const double zc = std::clamp(z, 0.0, 1.0);
        const std::size_t blocks =
            static_cast<std::size_t>(std::llround(zc * static_cast<double>(mb)));
        // Layout seeded by the village tag only: a growth sequence keeps its
        // earlier blocks and adds new ones.
        Rng rng(derive_seed(seed, "synth.image", village_tag));
        images.push_back(render_image(image_size, blocks, rng));
    }
    return images;
}

SynthWorld synth_generate(const SynthConfig& config) {
    config.validate();
    SynthWorld world;
    world.config = config;
    const std::size_t n = config.village_count;
    world.grid_side = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(n))));

    const std::size_t mb = max_blocks(config.image_size);
    Rng latent_rng(derive_seed(config.seed, "synth.latent"));
    world.latent.resize(n);
    world.signal.resize(n);
    world.builtup_pixels.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        world.latent[v] = latent_rng.next_double();
        const std::size_t blocks = static_cast<std::size_t>(
            std::llround(world.latent[v] * static_cast<double>(mb)));
        world.signal[v] = static_cast<double>(blocks) / static_cast<double>(mb);
        world.builtup_pixels[v] = blocks * 36;
    }

    world.images.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
        Rng rng(derive_seed(config.seed, "synth.image", v));
        const std::size_t blocks = world.builtup_pixels[v] / 36;
        world.images.push_back(render_image(config.image_size, blocks, rng));
    }

    Rng noise_rng(derive_seed(config.seed, "synth.noise"));
    world.rows.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        census::CensusRow& row = world.rows[v];
        row.village_id = "v" + std::to_string(v);
        const double g = relation_value(config.relation, world.signal[v]);
        for (std::size_t c = 1; c <= census::kRawColumnCount; ++c) {
            const ColumnModel m = column_model(c);
            const double level = m.positive ? g : (1.0 - g);
            double value = m.base + m.span * level;
            if (config.noise_level > 0.0)
                value += config.noise_level * m.span * noise_rng.next_gaussian();
            row.columns[c] = value;
        }
    }

    // Planted outliers: exactly floor(fraction * n) rows, wildly shifted.
    world.corrupted.assign(n, false);
    const std::size_t n_outliers =
        static_cast<std::size_t>(config.outlier_fraction * static_cast<double>(n));
    if (n_outliers > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng pick(derive_seed(config.seed, "synth.outliers"));
        pick.shuffle(order);
        for (std::size_t i = 0; i < n_outliers; ++i) {
            const std::size_t v = order[i];
            world.corrupted[v] = true;
            // Random-sign offsets per column: coordinated one-direction
            // corruption would inflate the covariance along itself and mask
            // the outliers from the Mahalanobis filter.
            Rng corrupt(derive_seed(config.seed, "synth.corrupt", v));
            for (std::size_t c = 1; c <= census::kRawColumnCount; ++c) {
                const double sign = corrupt.next_below(2) == 0 ? -1.0 : 1.0;
                world.rows[v].columns[c] += sign * (300.0 + 300.0 * corrupt.next_double());
            }
        }
    }

    world.night.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        world.night[v].cell_id = "v" + std::to_string(v);
        world.night[v].intensity = quantize_night(world.signal[v]);
        world.night[v].image_index = v;
    }

    // Districts: blocks of district_side x district_side grid cells.
    world.district_ids.resize(n);
    const std::size_t blocks_per_row =
        (world.grid_side + config.district_side - 1) / config.district_side;
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t br = world.village_row(v) / config.district_side;
        const std::size_t bc = world.village_col(v) / config.district_side;
        world.district_ids[v] = "d" + std::to_string(br * blocks_per_row + bc);
    }
    std::set<std::string> unique(world.district_ids.begin(), world.district_ids.end());
    world.districts.assign(unique.begin(), unique.end());

    // District targets: learnable ones are smooth monotone functions of the
    // mean development signal; the rest are pure noise.
    std::vector<double> district_mean(world.districts.size(), 0.0);
    std::vector<std::size_t> district_count(world.districts.size(), 0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto it = std::lower_bound(world.districts.begin(), world.districts.end(),
                                         world.district_ids[v]);
        const std::size_t d =
            static_cast<std::size_t>(it - world.districts.begin());
        district_mean[d] += world.signal[v];
        ++district_count[d];
    }
    for (std::size_t d = 0; d < district_mean.size(); ++d)
        district_mean[d] /= static_cast<double>(district_count[d]);

    Rng target_rng(derive_seed(config.seed, "synth.targets"));
    world.district_targets.assign(world.districts.size(), {});
    for (std::size_t j = 0; j < config.learnable_targets; ++j)
        world.district_target_names.push_back("target_learn_" + std::to_string(j));
    for (std::size_t j = 0; j < config.noise_targets; ++j)
        world.district_target_names.push_back("target_noise_" + std::to_string(j));
    for (std::size_t d = 0; d < world.districts.size(); ++d) {
        auto& row = world.district_targets[d];
        const double m = district_mean[d];
        for (std::size_t j = 0; j < config.learnable_targets; ++j) {
            double h;
            switch (j % 4) {
                case 0: h = m; break;
                case 1: h = m * m; break;
                case 2: h = std::sqrt(m); break;
                default: h = 1.0 / (1.0 + std::exp(-6.0 * (m - 0.5))); break;
            }
            row.push_back(20.0 + 60.0 * h +
                          config.target_noise * 60.0 * target_rng.next_gaussian());
        }
        for (std::size_t j = 0; j < config.noise_targets; ++j)
            row.push_back(50.0 + 15.0 * target_rng.next_gaussian());
    }
    return world;
}

Dataset make_dataset(const SynthWorld& world) {
    Dataset ds;
    ds.images = world.images;
    const std::size_t n = world.rows.size();
    ds.targets = nn::Tensor({n, census::kIndicatorCount});
    for (std::size_t v = 0; v < n; ++v) {
        const census::AssetVector a = census::aggregate_assets(world.rows[v]);
        for (std::size_t k = 0; k < census::kIndicatorCount; ++k)
            ds.targets.at2(v, k) = a[k];
    }
    return ds;
}

const std::array<bool, census::kIndicatorCount>& development_positive() {
    static const std::array<bool, census::kIndicatorCount> flags = [] {
        std::array<bool, census::kIndicatorCount> f;
        f.fill(true);
        f[census::kWaterUntreated] = false;
        f[census::kWaterNatural] = false;
        f[census::kLightOil] = false;
        f[census::kNoAssets] = false;
        f[census::kRoomsUnder3] = false;
        return f;
    }();
    return flags;
}

}  // namespace assetlens::pipeline
