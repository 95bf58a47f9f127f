#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "assetlens/census/census.hpp"
#include "assetlens/nn/tensor.hpp"
#include "assetlens/pipeline/dataset.hpp"

namespace assetlens::pipeline {

enum class Relation { Linear, MonotoneNonlinear };

// Synthetic world with planted ground truth: each village carries a latent
// development level; images encode built-up blocks whose count tracks it,
// census columns are (optionally noisy) functions of it, and night intensity
// is its quantized image.
struct SynthConfig {
    std::size_t village_count = 200;
    std::size_t image_size = 64;           // multiple of 8
    Relation relation = Relation::Linear;
    double noise_level = 0.1;              // column noise, fraction of signal span
    double outlier_fraction = 0.0;         // in [0, 0.5)
    std::uint64_t seed = 0;

    std::size_t district_side = 4;         // district = block of side x side cells
    std::size_t learnable_targets = 6;     // district indicator table composition
    std::size_t noise_targets = 2;
    double target_noise = 0.05;

    void validate() const;
};

struct SynthWorld {
    SynthConfig config;
    std::size_t grid_side = 0;              // villages laid out row-major on a square grid
    std::vector<double> latent;             // z in [0,1)
    std::vector<double> signal;             // quantized development s = blobs/max_blobs
    std::vector<std::size_t> builtup_pixels;
    std::vector<nn::Tensor> images;         // (1, S, S), pixel values 0..255
    std::vector<census::CensusRow> rows;
    std::vector<NightCell> night;
    std::vector<bool> corrupted;            // planted outlier rows
    std::vector<std::string> district_ids;  // per village

    std::vector<std::string> district_target_names;
    std::vector<std::string> districts;                // unique, sorted
    std::vector<std::vector<double>> district_targets; // [district][target]

    std::size_t village_row(std::size_t v) const { return v / grid_side; }
    std::size_t village_col(std::size_t v) const { return v % grid_side; }
};

SynthWorld synth_generate(const SynthConfig& config);

// Images for explicitly chosen latent levels (used for growth sequences);
// village_tag seeds the block placement so a sequence shares its layout.
std::vector<nn::Tensor> images_for_latents(const std::vector<double>& latents,
                                           std::size_t image_size, std::uint64_t seed,
                                           std::uint64_t village_tag);

// Images plus aggregated asset targets, ready for training.
Dataset make_dataset(const SynthWorld& world);

// Which indicators grow with development in this world (the rest shrink).
const std::array<bool, census::kIndicatorCount>& development_positive();

}  // namespace assetlens::pipeline
