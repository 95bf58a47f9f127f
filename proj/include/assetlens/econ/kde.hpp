#pragma once

#include <cstddef>
#include <vector>

namespace assetlens::econ {

struct KdeConfig {
    double bandwidth = 0.0;        // <= 0: Silverman's rule
    std::size_t grid_points = 256;
    double padding_bandwidths = 3.0;  // grid extends this many h past the data
};

struct KdeResult {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
    bool degenerate = false;  // zero-variance input, density is a spike
};

// Gaussian kernel density estimate. Zero-variance input is reported as a
// degenerate spike rather than an error.
KdeResult kde(const std::vector<double>& values, const KdeConfig& config = {});

double silverman_bandwidth(const std::vector<double>& values);

}  // namespace assetlens::econ
