#pragma once

#include <cstddef>

namespace assetlens::econ {

// Fixed-model multiple-regression power analysis: the overall F test of k
// predictors with noncentrality lambda = f2 * N.
struct PowerSpec {
    double effect_size_f2 = 0.15;  // Cohen f^2
    double alpha = 0.05;
    double power = 0.8;
    std::size_t predictors = 1;

    void validate() const;
};

// Achieved power of the overall F test at sample size n.
double regression_power(const PowerSpec& spec, std::size_t n);

// Smallest N whose achieved power reaches the requested power.
std::size_t power_sample_size(const PowerSpec& spec);

}  // namespace assetlens::econ
