// assetlens: village-indicator prediction toolkit on synthetic worlds.
// Subcommands: synth, aggregate, train, transfer, analyze, econ.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "assetlens/census/census.hpp"
#include "assetlens/common/csv.hpp"
#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"
#include "assetlens/econ/kde.hpp"
#include "assetlens/econ/montecarlo.hpp"
#include "assetlens/econ/ols.hpp"
#include "assetlens/econ/power.hpp"
#include "assetlens/econ/records.hpp"
#include "assetlens/io/pgm.hpp"
#include "assetlens/nn/serialize.hpp"
#include "assetlens/pipeline/synth.hpp"
#include "assetlens/pipeline/train.hpp"
#include "assetlens/spatial/choropleth.hpp"
#include "assetlens/spatial/edges.hpp"
#include "assetlens/spatial/occlusion.hpp"
#include "assetlens/spatial/temporal.hpp"
#include "assetlens/transfer/transfer.hpp"

namespace fs = std::filesystem;
using namespace assetlens;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << text;
    if (!out) throw IoError("failed writing file: " + path.string());
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& options) {
    json manifest;
    manifest["command"] = command;
    manifest["options"] = options;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out);
    return dir;
}

// ---------------------------------------------------------------- synth ----

struct SynthOptions {
    std::string out;
    std::uint64_t seed = 0;
    std::size_t villages = 200;
    std::size_t image_size = 64;
    std::string relation = "linear";
    double noise = 0.1;
    double outlier_fraction = 0.0;
    std::size_t district_side = 4;
};

json synth_options_json(const SynthOptions& o) {
    return {{"out", o.out},
            {"seed", o.seed},
            {"villages", o.villages},
            {"image_size", o.image_size},
            {"relation", o.relation},
            {"noise", o.noise},
            {"outlier_fraction", o.outlier_fraction},
            {"district_side", o.district_side}};
}

pipeline::SynthConfig to_synth_config(const SynthOptions& o) {
    pipeline::SynthConfig cfg;
    cfg.village_count = o.villages;
    cfg.image_size = o.image_size;
    if (o.relation == "linear")
        cfg.relation = pipeline::Relation::Linear;
    else if (o.relation == "nonlinear")
        cfg.relation = pipeline::Relation::MonotoneNonlinear;
    else
        throw ConfigError("relation must be linear or nonlinear");
    cfg.noise_level = o.noise;
    cfg.outlier_fraction = o.outlier_fraction;
    cfg.district_side = o.district_side;
    cfg.seed = o.seed;
    return cfg;
}

void cmd_synth(const SynthOptions& o) {
    const fs::path out = ensure_out_dir(o.out);
    const pipeline::SynthWorld world = pipeline::synth_generate(to_synth_config(o));

    const fs::path image_dir = out / "images";
    fs::create_directories(image_dir);
    for (std::size_t v = 0; v < world.images.size(); ++v)
        io::write_pgm((image_dir / (world.rows[v].village_id + ".pgm")).string(),
                      world.images[v]);

    census::write_census_csv((out / "census.csv").string(), world.rows);

    csv::Table night;
    night.header = {"cell_id", "intensity", "image"};
    for (const pipeline::NightCell& c : world.night)
        night.rows.push_back({c.cell_id, std::to_string(c.intensity),
                              "images/" + world.rows[c.image_index].village_id + ".pgm"});
    csv::write_file((out / "night.csv").string(), night);

    csv::Table layout;
    layout.header = {"village_id", "row", "col"};
    for (std::size_t v = 0; v < world.rows.size(); ++v)
        layout.rows.push_back({world.rows[v].village_id,
                               std::to_string(world.village_row(v)),
                               std::to_string(world.village_col(v))});
    csv::write_file((out / "layout.csv").string(), layout);

    csv::Table districts;
    districts.header = {"village_id", "district_id"};
    for (std::size_t v = 0; v < world.rows.size(); ++v)
        districts.rows.push_back({world.rows[v].village_id, world.district_ids[v]});
    csv::write_file((out / "districts.csv").string(), districts);

    csv::Table targets;
    targets.header = {"district_id"};
    for (const auto& n : world.district_target_names) targets.header.push_back(n);
    for (std::size_t d = 0; d < world.districts.size(); ++d) {
        std::vector<std::string> cells = {world.districts[d]};
        for (double v : world.district_targets[d]) cells.push_back(csv::format_double(v));
        targets.rows.push_back(std::move(cells));
    }
    csv::write_file((out / "district_targets.csv").string(), targets);

    json info;
    info["grid_side"] = world.grid_side;
    info["villages"] = world.rows.size();
    info["image_size"] = o.image_size;
    json corrupted = json::array();
    for (std::size_t v = 0; v < world.corrupted.size(); ++v)
        if (world.corrupted[v]) corrupted.push_back(world.rows[v].village_id);
    info["corrupted_villages"] = std::move(corrupted);
    write_text(out / "world.json", info.dump(2) + "\n");

    write_manifest(out, "synth", synth_options_json(o));
}

// ------------------------------------------------------------ aggregate ----

struct AggregateOptions {
    std::string census;
    std::string out;
    double threshold = 30.0;
    double ridge = 1e-6;
};

void cmd_aggregate(const AggregateOptions& o) {
    const fs::path out = ensure_out_dir(o.out);
    const std::vector<census::CensusRow> rows = census::read_census_csv(o.census);

    std::vector<census::AssetVector> assets;
    assets.reserve(rows.size());
    for (const census::CensusRow& row : rows)
        assets.push_back(census::aggregate_assets(row));
    census::write_assets_csv((out / "assets.csv").string(), assets);

    const census::OutlierReport report =
        census::mahalanobis_filter(assets, o.threshold, o.ridge);
    census::write_outlier_csv((out / "outliers.csv").string(), report);

    const auto correlation = census::correlation_matrix(rows);
    census::write_correlation_csv((out / "correlation.csv").string(), correlation);

    write_manifest(out, "aggregate",
                   {{"census", o.census},
                    {"out", o.out},
                    {"threshold", o.threshold},
                    {"ridge", o.ridge}});
}

// ---------------------------------------------------------------- train ----

struct TrainOptions {
    std::string world;
    std::string out;
    std::string mode = "direct";
    std::uint64_t seed = 0;
    bool reject = false;
    double threshold = 30.0;
    std::size_t epochs = 30;
    double lr = 1e-6;
    double gamma = 0.2;
    double momentum = 0.8;
    double weight_decay = 0.005;
    std::size_t batch = 32;
    std::size_t step_interval_epochs = 2;
    std::size_t feature_width = 128;
    double dropout = 0.0;
    bool no_augment = false;
    double train_fraction = 0.8;
    double target_skew = 0.4;
};

json train_options_json(const TrainOptions& o) {
    return {{"world", o.world},
            {"out", o.out},
            {"mode", o.mode},
            {"seed", o.seed},
            {"reject", o.reject},
            {"threshold", o.threshold},
            {"epochs", o.epochs},
            {"lr", o.lr},
            {"gamma", o.gamma},
            {"momentum", o.momentum},
            {"weight_decay", o.weight_decay},
            {"batch", o.batch},
            {"step_interval_epochs", o.step_interval_epochs},
            {"feature_width", o.feature_width},
            {"dropout", o.dropout},
            {"no_augment", o.no_augment},
            {"train_fraction", o.train_fraction},
            {"target_skew", o.target_skew}};
}

std::vector<nn::Tensor> load_world_images(const fs::path& world,
                                          const std::vector<census::CensusRow>& rows) {
    std::vector<nn::Tensor> images;
    images.reserve(rows.size());
    for (const census::CensusRow& row : rows)
        images.push_back(
            io::read_pgm((world / "images" / (row.village_id + ".pgm")).string()));
    return images;
}

pipeline::TrainConfig make_train_config(const TrainOptions& o, std::size_t n_train) {
    pipeline::TrainConfig tc;
    tc.sgd.learning_rate = o.lr;
    tc.sgd.gamma = o.gamma;
    tc.sgd.momentum = o.momentum;
    tc.sgd.weight_decay = o.weight_decay;
    tc.sgd.batch_size = o.batch;
    const std::size_t iters_per_epoch = std::max<std::size_t>(1, (n_train + o.batch - 1) / o.batch);
    tc.sgd.step_interval = std::max<std::size_t>(1, o.step_interval_epochs * iters_per_epoch);
    if (!o.no_augment) {
        tc.augment.horizontal_flip = true;
        tc.augment.vertical_flip = true;
        tc.augment.rotations = {0, 90, 180, 270};
    }
    tc.epochs = o.epochs;
    tc.seed = derive_seed(o.seed, "cli.train");
    return tc;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
    csv::Table t;
    t.header = {"epoch", "mean_loss"};
    for (std::size_t e = 0; e < losses.size(); ++e)
        t.rows.push_back({std::to_string(e), csv::format_double(losses[e])});
    csv::write_file(path.string(), t);
}

json r2_report_json(const pipeline::R2Report& report,
                    const std::vector<std::string>& names) {
    json per = json::object();
    for (std::size_t j = 0; j < report.per_indicator.size(); ++j) {
        const std::string name = j < names.size() ? names[j] : "y" + std::to_string(j);
        if (report.defined[j])
            per[name] = report.per_indicator[j];
        else
            per[name] = nullptr;
    }
    return {{"per_indicator", per},
            {"overall_variance_weighted", report.overall},
            {"samples", report.sample_count}};
}

void cmd_train(const TrainOptions& o) {
    const fs::path out = ensure_out_dir(o.out);
    const fs::path world(o.world);
    const auto rows = census::read_census_csv((world / "census.csv").string());
    const auto images = load_world_images(world, rows);
    if (images.empty()) throw InputError("world has no images");
    const std::size_t image_size = images[0].shape[1];

    json result;
    if (o.mode == "direct") {
        pipeline::Dataset ds;
        ds.images = images;
        ds.targets = nn::Tensor({rows.size(), census::kIndicatorCount});
        for (std::size_t v = 0; v < rows.size(); ++v) {
            const census::AssetVector a = census::aggregate_assets(rows[v]);
            for (std::size_t k = 0; k < census::kIndicatorCount; ++k)
                ds.targets.at2(v, k) = a[k];
        }
        pipeline::split(ds, o.train_fraction, derive_seed(o.seed, "cli.split"));
        if (o.reject) {
            const census::OutlierReport rejected =
                pipeline::reject_train_outliers(ds, o.threshold);
            result["rejected_train_rows"] =
                static_cast<std::size_t>(std::count(rejected.rejected.begin(),
                                                    rejected.rejected.end(), true));
        }
        const nn::NetworkSpec spec = nn::micro_net_spec(
            image_size, census::kIndicatorCount, o.feature_width, o.dropout);
        const nn::Network start = nn::init_network(spec, derive_seed(o.seed, "cli.init"));
        const pipeline::TrainConfig tc = make_train_config(o, ds.train_indices.size());
        const pipeline::TrainResult trained = pipeline::train(ds, start, tc);
        nn::save_network(trained.net, (out / "model.json").string());
        write_loss_csv(out / "loss.csv", trained.epoch_loss);
        const pipeline::R2Report r2 =
            pipeline::evaluate_r2(trained.net, ds, ds.test_indices);
        std::vector<std::string> names(census::indicator_names().begin(),
                                       census::indicator_names().end());
        result["r2"] = r2_report_json(r2, names);
        result["test_loss"] = pipeline::evaluate_loss(trained.net, ds, ds.test_indices);
    } else if (o.mode == "nightlight") {
        const csv::Table night = csv::read_file((world / "night.csv").string());
        const int id_col = night.column("cell_id");
        const int val_col = night.column("intensity");
        if (id_col < 0 || val_col < 0)
            throw InputError("night.csv needs cell_id and intensity columns");
        std::vector<pipeline::NightCell> cells(night.rows.size());
        for (std::size_t i = 0; i < night.rows.size(); ++i) {
            cells[i].cell_id = night.rows[i][static_cast<std::size_t>(id_col)];
            cells[i].intensity =
                std::stoi(night.rows[i][static_cast<std::size_t>(val_col)]);
            cells[i].image_index = i;
        }
        std::vector<double> intensities(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i)
            intensities[i] = cells[i].intensity;
        std::vector<pipeline::NightCell> kept = cells;
        if (pipeline::skewness(intensities) > o.target_skew)
            kept = pipeline::undersample_skew(cells, o.target_skew,
                                              derive_seed(o.seed, "cli.undersample"));
        result["cells_after_undersampling"] = kept.size();

        const nn::NetworkSpec spec =
            nn::micro_net_spec(image_size, 1, o.feature_width, o.dropout);
        const pipeline::TrainConfig tc = make_train_config(
            o, static_cast<std::size_t>(o.train_fraction *
                                        static_cast<double>(kept.size())));
        const auto [net, r2] = pipeline::train_nightlight(
            kept, images, spec, tc, derive_seed(o.seed, "cli.init"), o.train_fraction);
        nn::save_network(net, (out / "model.json").string());
        result["r2"] = r2_report_json(r2, {"night_intensity"});
    } else {
        throw ConfigError("mode must be direct or nightlight");
    }

    write_text(out / "r2.json", result.dump(2) + "\n");
    write_manifest(out, "train", train_options_json(o));
}

// ------------------------------------------------------------- transfer ----

struct TransferOptions {
    std::string world;
    std::string model;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t k = 5;
    std::size_t head_layers = 1;
    std::size_t hidden = 32;
    std::size_t epochs = 300;
    double lr = 1e-4;
};

void cmd_transfer(const TransferOptions& o) {
    const fs::path out = ensure_out_dir(o.out);
    const fs::path world(o.world);
    const nn::Network net = nn::load_network(o.model);
    const auto rows = census::read_census_csv((world / "census.csv").string());
    const auto images = load_world_images(world, rows);

    // District mapping and targets.
    const csv::Table districts = csv::read_file((world / "districts.csv").string());
    std::map<std::string, std::string> village_to_district;
    for (const auto& row : districts.rows) village_to_district[row[0]] = row[1];
    std::vector<std::string> district_per_village(rows.size());
    for (std::size_t v = 0; v < rows.size(); ++v) {
        const auto it = village_to_district.find(rows[v].village_id);
        if (it == village_to_district.end())
            throw InputError("village " + rows[v].village_id + " has no district");
        district_per_village[v] = it->second;
    }

    const nn::Tensor features = transfer::extract_features_batch(net, images);
    auto [district_order, district_features] =
        transfer::mean_by_district(features, district_per_village);

    const csv::Table targets_csv =
        csv::read_file((world / "district_targets.csv").string());
    std::vector<std::string> target_names(targets_csv.header.begin() + 1,
                                          targets_csv.header.end());
    std::map<std::string, std::vector<double>> target_rows;
    for (const auto& row : targets_csv.rows) {
        std::vector<double> vals;
        for (std::size_t c = 1; c < row.size(); ++c) vals.push_back(std::stod(row[c]));
        target_rows[row[0]] = std::move(vals);
    }
    nn::Tensor table({district_order.size(), target_names.size()});
    for (std::size_t d = 0; d < district_order.size(); ++d) {
        const auto it = target_rows.find(district_order[d]);
        if (it == target_rows.end())
            throw InputError("district " + district_order[d] + " has no targets");
        for (std::size_t j = 0; j < target_names.size(); ++j)
            table.at2(d, j) = it->second[j];
    }

    transfer::HeadConfig head;
    head.layer_count = o.head_layers;
    head.hidden_width = o.hidden;
    head.epochs = o.epochs;
    head.sgd.learning_rate = o.lr;
    head.sgd.momentum = 0.8;
    head.sgd.weight_decay = 0.0005;
    head.sgd.step_interval = 100000;
    head.seed = derive_seed(o.seed, "cli.head");

    const transfer::SweepResult sweep = transfer::indicator_sweep(
        district_features, target_names, table, o.k, head,
        derive_seed(o.seed, "cli.folds"));

    csv::Table r2_csv;
    r2_csv.header = {"indicator", "r2"};
    for (std::size_t j = 0; j < sweep.indicator_names.size(); ++j)
        r2_csv.rows.push_back(
            {sweep.indicator_names[j], csv::format_double(sweep.r2[j])});
    csv::write_file((out / "per_indicator_r2.csv").string(), r2_csv);

    json hist;
    hist["bin_edges"] = sweep.bin_edges;
    hist["counts"] = sweep.histogram;
    write_text(out / "histogram.json", hist.dump(2) + "\n");

    write_manifest(out, "transfer",
                   {{"world", o.world},
                    {"model", o.model},
                    {"out", o.out},
                    {"seed", o.seed},
                    {"k", o.k},
                    {"head_layers", o.head_layers},
                    {"hidden", o.hidden},
                    {"epochs", o.epochs},
                    {"lr", o.lr}});
}

// -------------------------------------------------------------- analyze ----

struct AnalyzeOptions {
    std::string world;
    std::string model;
    std::string out;
    std::uint64_t seed = 0;
    std::string indicator = "electronics";
    std::size_t occluder = 16;
    std::size_t stride = 8;
    std::string fill = "mean";
    double edge_percentile = 90.0;
    std::size_t village = 0;
    std::size_t temporal_steps = 6;
};

void cmd_analyze(const AnalyzeOptions& o) {
    const fs::path out = ensure_out_dir(o.out);
    const fs::path world(o.world);
    const nn::Network net = nn::load_network(o.model);
    const auto rows = census::read_census_csv((world / "census.csv").string());
    const auto images = load_world_images(world, rows);
    if (o.village >= images.size()) throw InputError("village index out of range");

    int indicator = -1;
    for (std::size_t k = 0; k < census::kIndicatorCount; ++k)
        if (census::indicator_names()[k] == o.indicator) indicator = static_cast<int>(k);
    if (indicator < 0) throw InputError("unknown indicator: " + o.indicator);

    // Occlusion heatmap for the chosen village.
    double fill_value = 0.0;
    if (o.fill == "mean") {
        double acc = 0.0;
        std::size_t count = 0;
        for (const nn::Tensor& img : images) {
            for (double v : img.data) acc += v;
            count += img.size();
        }
        fill_value = acc / static_cast<double>(count);
    } else if (o.fill != "zero") {
        throw ConfigError("fill must be mean or zero");
    }
    const spatial::OcclusionHeatmap heatmap = spatial::occlusion_heatmap(
        net, images[o.village], static_cast<std::size_t>(indicator), o.occluder,
        o.stride, fill_value);
    csv::Table occ;
    occ.header = {"row", "col", "prediction"};
    for (std::size_t r = 0; r < heatmap.rows; ++r)
        for (std::size_t c = 0; c < heatmap.cols; ++c)
            occ.rows.push_back({std::to_string(r), std::to_string(c),
                                csv::format_double(heatmap.at(r, c))});
    csv::write_file((out / "occlusion.csv").string(), occ);
    {
        // Raster: dip below baseline rendered dark.
        nn::Tensor raster({heatmap.rows, heatmap.cols});
        double lo = heatmap.values[0], hi = heatmap.values[0];
        for (double v : heatmap.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double span = hi > lo ? hi - lo : 1.0;
        for (std::size_t i = 0; i < heatmap.values.size(); ++i)
            raster.data[i] = 255.0 * (heatmap.values[i] - lo) / span;
        io::write_pgm((out / "occlusion.pgm").string(), raster);
    }

    // Prediction and census grids for the chosen indicator.
    const csv::Table layout = csv::read_file((world / "layout.csv").string());
    std::size_t side = 0;
    for (const auto& row : layout.rows)
        side = std::max({side, static_cast<std::size_t>(std::stoul(row[1])) + 1,
                         static_cast<std::size_t>(std::stoul(row[2])) + 1});
    spatial::GeoGrid pred_grid(side, side), census_grid(side, side);
    for (auto* g : {&pred_grid, &census_grid})
        for (std::size_t i = 0; i < side * side; ++i) g->present[i] = false;

    pipeline::Dataset ds;
    ds.images = images;
    ds.targets = nn::Tensor({rows.size(), census::kIndicatorCount});
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), 0);
    const nn::Tensor pred = pipeline::predict_all(net, ds, all);
    for (std::size_t v = 0; v < rows.size(); ++v) {
        const std::size_t r = std::stoul(layout.rows[v][1]);
        const std::size_t c = std::stoul(layout.rows[v][2]);
        pred_grid.set(r, c, pred.at2(v, static_cast<std::size_t>(indicator)));
        census_grid.set(
            r, c,
            census::aggregate_assets(rows[v]).values[static_cast<std::size_t>(indicator)]);
    }

    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < side * side; ++i) {
        if (census_grid.present[i]) {
            lo = std::min(lo, census_grid.values[i]);
            hi = std::max(hi, census_grid.values[i]);
        }
        if (pred_grid.present[i]) {
            lo = std::min(lo, pred_grid.values[i]);
            hi = std::max(hi, pred_grid.values[i]);
        }
    }
    const spatial::Palette palette = spatial::Palette::sequential(lo, hi);
    spatial::render_choropleth(pred_grid, palette,
                               (out / ("pred_" + o.indicator + ".png")).string());
    spatial::render_choropleth(census_grid, palette,
                               (out / ("census_" + o.indicator + ".png")).string());

    // Edge alerts on the prediction grid.
    const spatial::EdgeMap edges = spatial::detect_edges(
        pred_grid, spatial::ThresholdPolicy::percentile(o.edge_percentile));
    csv::Table edge_csv;
    edge_csv.header = {"row", "col", "magnitude", "edge"};
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c)
            edge_csv.rows.push_back({std::to_string(r), std::to_string(c),
                                     csv::format_double(edges.at(r, c)),
                                     edges.edge(r, c) ? "1" : "0"});
    csv::write_file((out / "edges.csv").string(), edge_csv);
    {
        nn::Tensor mask({side, side});
        for (std::size_t i = 0; i < side * side; ++i)
            mask.data[i] = edges.mask[i] ? 255.0 : 0.0;
        io::write_pgm((out / "edges.pgm").string(), mask);
    }

    // Temporal replay on a synthetic growth sequence of the chosen village.
    const std::size_t image_size = images[0].shape[1];
    std::vector<double> latents;
    for (std::size_t t = 0; t < o.temporal_steps; ++t)
        latents.push_back(static_cast<double>(t + 1) /
                          static_cast<double>(o.temporal_steps));
    const auto sequence =
        pipeline::images_for_latents(latents, image_size, o.seed, o.village);
    const auto series = spatial::temporal_track(net, sequence);
    csv::Table temporal;
    temporal.header = {"step"};
    for (const auto& name : census::indicator_names()) temporal.header.push_back(name);
    for (std::size_t t = 0; t < series.size(); ++t) {
        std::vector<std::string> cells = {std::to_string(t)};
        for (double v : series[t].values) cells.push_back(csv::format_double(v));
        temporal.rows.push_back(std::move(cells));
    }
    csv::write_file((out / "temporal.csv").string(), temporal);

    write_manifest(out, "analyze",
                   {{"world", o.world},
                    {"model", o.model},
                    {"out", o.out},
                    {"seed", o.seed},
                    {"indicator", o.indicator},
                    {"occluder", o.occluder},
                    {"stride", o.stride},
                    {"fill", o.fill},
                    {"edge_percentile", o.edge_percentile},
                    {"village", o.village},
                    {"temporal_steps", o.temporal_steps}});
}

// ----------------------------------------------------------------- econ ----

struct EconOptions {
    std::string records;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t synth_villages = 20000;
    std::size_t sample_size = 3500;
    std::size_t runs = 100;
    std::string kde_variable = "women_lit";
    double power_f2 = 0.02;
    double power_alpha = 0.05;
    double power_power = 0.95;
    std::size_t power_predictors = 8;
};

void cmd_econ(const EconOptions& o) {
    const fs::path out = ensure_out_dir(o.out);
    econ::RecordTable records;
    if (!o.records.empty()) {
        records = econ::read_records_csv(o.records);
    } else {
        econ::EconSynthConfig synth;
        synth.villages = o.synth_villages;
        synth.seed = derive_seed(o.seed, "cli.econ.synth");
        records = econ::synth_econ_records(synth);
        econ::write_records_csv((out / "records.csv").string(), records);
    }

    // Nested comparison table over whichever standard specs have columns.
    std::vector<econ::SpecModel> specs;
    for (const econ::SpecModel& spec :
         econ::standard_specs(records.categorical_index("state") >= 0)) {
        bool usable = records.numeric_index(spec.outcome) >= 0;
        for (const econ::Regressor& r : spec.regressors)
            usable = usable && records.numeric_index(r.column) >= 0;
        if (usable) specs.push_back(spec);
    }
    if (specs.empty()) throw InputError("no standard spec matches the record columns");
    const std::vector<econ::OlsFit> fits = econ::run_specs(records, specs);
    write_text(out / "table4.txt", econ::format_comparison_table(fits));
    {
        json jfits = json::array();
        for (const econ::OlsFit& fit : fits) {
            json jf;
            jf["spec"] = fit.spec_name;
            jf["r2"] = fit.r2;
            jf["n"] = fit.n;
            json terms = json::object();
            for (std::size_t i = 0; i < fit.names.size(); ++i)
                terms[fit.names[i]] = {{"coef", fit.coef(static_cast<Eigen::Index>(i))},
                                       {"se", fit.se(static_cast<Eigen::Index>(i))},
                                       {"t", fit.t(static_cast<Eigen::Index>(i))},
                                       {"p", fit.p(static_cast<Eigen::Index>(i))}};
            jf["terms"] = std::move(terms);
            jfits.push_back(std::move(jf));
        }
        write_text(out / "table4.json", json{{"fits", jfits}}.dump(2) + "\n");
    }

    // Repeated sampling on the last usable spec.
    const econ::SpecModel& mc_spec = specs.back();
    if (records.rows >= o.sample_size) {
        const econ::MonteCarloReport mc = econ::repeated_sampling(
            records, mc_spec, o.sample_size, o.runs, derive_seed(o.seed, "cli.econ.mc"));
        write_text(out / "montecarlo.json", econ::monte_carlo_to_json(mc) + "\n");

        // KDE of the requested variable's coefficient sample.
        std::string kde_term = o.kde_variable;
        for (std::size_t v = 0; v < mc.variable_names.size(); ++v) {
            if (mc.variable_names[v] == kde_term ||
                mc.variable_names[v] == "ln(" + kde_term + ")") {
                const econ::KdeResult density = econ::kde(mc.coefficient_samples[v]);
                csv::Table kde_csv;
                kde_csv.header = {"x", "density"};
                for (std::size_t i = 0; i < density.x.size(); ++i)
                    kde_csv.rows.push_back({csv::format_double(density.x[i]),
                                            csv::format_double(density.density[i])});
                csv::write_file((out / ("kde_" + kde_term + ".csv")).string(), kde_csv);
                break;
            }
        }
    }

    econ::PowerSpec power;
    power.effect_size_f2 = o.power_f2;
    power.alpha = o.power_alpha;
    power.power = o.power_power;
    power.predictors = o.power_predictors;
    const std::size_t required_n = econ::power_sample_size(power);
    write_text(out / "power.json",
               json{{"f2", power.effect_size_f2},
                    {"alpha", power.alpha},
                    {"power", power.power},
                    {"predictors", power.predictors},
                    {"required_n", required_n}}
                       .dump(2) +
                   "\n");

    write_manifest(out, "econ",
                   {{"records", o.records},
                    {"out", o.out},
                    {"seed", o.seed},
                    {"synth_villages", o.synth_villages},
                    {"sample_size", o.sample_size},
                    {"runs", o.runs},
                    {"kde_variable", o.kde_variable},
                    {"power_f2", o.power_f2},
                    {"power_alpha", o.power_alpha},
                    {"power_power", o.power_power},
                    {"power_predictors", o.power_predictors}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"assetlens: village indicator prediction on synthetic worlds"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file");

    SynthOptions synth;
    CLI::App* s = app.add_subcommand("synth", "generate a synthetic world");
    s->add_option("--out", synth.out, "output directory")->required();
    s->add_option("--seed", synth.seed, "top-level seed");
    s->add_option("--villages", synth.villages, "village count");
    s->add_option("--image-size", synth.image_size, "image extent (multiple of 8)");
    s->add_option("--relation", synth.relation, "linear|nonlinear");
    s->add_option("--noise", synth.noise, "census column noise level");
    s->add_option("--outlier-fraction", synth.outlier_fraction, "corrupted row fraction");
    s->add_option("--district-side", synth.district_side, "district block side");

    AggregateOptions agg;
    CLI::App* a = app.add_subcommand("aggregate", "asset vectors + diagnostics");
    a->add_option("--census", agg.census, "census csv path")->required();
    a->add_option("--out", agg.out, "output directory")->required();
    a->add_option("--threshold", agg.threshold, "Mahalanobis threshold");
    a->add_option("--ridge", agg.ridge, "covariance ridge scale");

    TrainOptions train;
    CLI::App* t = app.add_subcommand("train", "train the regression model");
    t->add_option("--world", train.world, "world directory")->required();
    t->add_option("--out", train.out, "output directory")->required();
    t->add_option("--mode", train.mode, "direct|nightlight");
    t->add_option("--seed", train.seed, "top-level seed");
    t->add_flag("--reject", train.reject, "Mahalanobis outlier rejection on train split");
    t->add_option("--threshold", train.threshold, "rejection threshold");
    t->add_option("--epochs", train.epochs, "epoch budget");
    t->add_option("--lr", train.lr, "base learning rate");
    t->add_option("--gamma", train.gamma, "step decay factor");
    t->add_option("--momentum", train.momentum, "momentum");
    t->add_option("--weight-decay", train.weight_decay, "L2 weight decay");
    t->add_option("--batch", train.batch, "batch size");
    t->add_option("--step-interval-epochs", train.step_interval_epochs,
                  "epochs per learning-rate decay step");
    t->add_option("--feature-width", train.feature_width, "penultimate layer width");
    t->add_option("--dropout", train.dropout, "dropout probability");
    t->add_flag("--no-augment", train.no_augment, "disable augmentation");
    t->add_option("--train-fraction", train.train_fraction, "train split fraction");
    t->add_option("--target-skew", train.target_skew, "night-light skew target");

    TransferOptions transfer_opts;
    CLI::App* tr = app.add_subcommand("transfer", "district-level transfer learning");
    tr->add_option("--world", transfer_opts.world, "world directory")->required();
    tr->add_option("--model", transfer_opts.model, "trained model path")->required();
    tr->add_option("--out", transfer_opts.out, "output directory")->required();
    tr->add_option("--seed", transfer_opts.seed, "top-level seed");
    tr->add_option("--k", transfer_opts.k, "cross-validation folds");
    tr->add_option("--head-layers", transfer_opts.head_layers, "1 or 2");
    tr->add_option("--hidden", transfer_opts.hidden, "hidden width for 2-layer heads");
    tr->add_option("--epochs", transfer_opts.epochs, "head training epochs");
    tr->add_option("--lr", transfer_opts.lr, "head learning rate");

    AnalyzeOptions analyze;
    CLI::App* an = app.add_subcommand("analyze", "occlusion, edges, temporal, choropleth");
    an->add_option("--world", analyze.world, "world directory")->required();
    an->add_option("--model", analyze.model, "trained model path")->required();
    an->add_option("--out", analyze.out, "output directory")->required();
    an->add_option("--seed", analyze.seed, "top-level seed");
    an->add_option("--indicator", analyze.indicator, "indicator name");
    an->add_option("--occluder", analyze.occluder, "occluder size");
    an->add_option("--stride", analyze.stride, "occluder stride");
    an->add_option("--fill", analyze.fill, "mean|zero occluder fill");
    an->add_option("--edge-percentile", analyze.edge_percentile, "edge threshold percentile");
    an->add_option("--village", analyze.village, "village index for occlusion/temporal");
    an->add_option("--temporal-steps", analyze.temporal_steps, "growth sequence length");

    EconOptions econ_opts;
    CLI::App* e = app.add_subcommand("econ", "OLS case study + Monte Carlo");
    e->add_option("--records", econ_opts.records, "records csv (synthesized when absent)");
    e->add_option("--out", econ_opts.out, "output directory")->required();
    e->add_option("--seed", econ_opts.seed, "top-level seed");
    e->add_option("--synth-villages", econ_opts.synth_villages,
                  "villages when synthesizing records");
    e->add_option("--sample-size", econ_opts.sample_size, "villages per regression run");
    e->add_option("--runs", econ_opts.runs, "repeated sampling runs");
    e->add_option("--kde-variable", econ_opts.kde_variable, "coefficient KDE variable");
    e->add_option("--power-f2", econ_opts.power_f2, "Cohen f^2 effect size");
    e->add_option("--power-alpha", econ_opts.power_alpha, "significance level");
    e->add_option("--power-power", econ_opts.power_power, "desired power");
    e->add_option("--power-predictors", econ_opts.power_predictors, "predictor count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);
        app.exit(err);
        return 2;
    }

    try {
        if (s->parsed()) cmd_synth(synth);
        if (a->parsed()) cmd_aggregate(agg);
        if (t->parsed()) cmd_train(train);
        if (tr->parsed()) cmd_transfer(transfer_opts);
        if (an->parsed()) cmd_analyze(analyze);
        if (e->parsed()) cmd_econ(econ_opts);
    } catch (const UsageError& err) {
        std::cerr << "ERROR usage: " << err.what() << "\n";
        return 2;
    } catch (const InputError& err) {
        std::cerr << "ERROR input: " << err.what() << "\n";
        return 1;
    } catch (const ConfigError& err) {
        std::cerr << "ERROR config: " << err.what() << "\n";
        return 1;
    } catch (const NumericError& err) {
        std::cerr << "ERROR numeric: " << err.what() << "\n";
        return 1;
    } catch (const IoError& err) {
        std::cerr << "ERROR io: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "ERROR runtime: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
