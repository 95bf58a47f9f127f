#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "assetlens/nn/tensor.hpp"

namespace assetlens::pipeline {

// Sample skewness m3 / m2^(3/2) with population central moments.
// Requires >= 3 values with nonzero variance.
double skewness(const std::vector<double>& values);

struct R2Report {
    std::vector<double> per_indicator;     // NaN where undefined
    std::vector<bool> defined;             // target variance > 0
    double overall = 0.0;                  // variance-weighted over defined indicators
    std::size_t sample_count = 0;
};

// Out-of-sample R^2 per indicator plus the variance-weighted overall score.
// pred and actual are (N, D) tensors. Indicators whose target variance is
// zero are reported undefined and excluded from the weighted overall.
R2Report r2_score(const nn::Tensor& pred, const nn::Tensor& actual);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace assetlens::pipeline
