#include "assetlens/econ/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "assetlens/common/error.hpp"

namespace assetlens::econ {

double silverman_bandwidth(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw InputError("bandwidth needs at least 2 values");
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    const double sd = std::sqrt(var);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double w = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - w) + sorted[hi] * w;
    };
    const double iqr = quantile(0.75) - quantile(0.25);

    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

KdeResult kde(const std::vector<double>& values, const KdeConfig& config) {
    if (values.size() < 2) throw InputError("kde needs at least 2 values");

    KdeResult result;
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    if (*min_it == *max_it) {
        result.degenerate = true;
        result.bandwidth = 0.0;
        result.x = {*min_it};
        result.density = {std::numeric_limits<double>::infinity()};
        return result;
    }

    result.bandwidth =
        config.bandwidth > 0.0 ? config.bandwidth : silverman_bandwidth(values);
    const double h = result.bandwidth;
    const double lo = *min_it - config.padding_bandwidths * h;
    const double hi = *max_it + config.padding_bandwidths * h;
    const std::size_t m = std::max<std::size_t>(config.grid_points, 2);
    result.x.resize(m);
    result.density.resize(m);
    const double inv = 1.0 / (static_cast<double>(values.size()) * h *
                              std::sqrt(2.0 * 3.14159265358979323846));
    for (std::size_t i = 0; i < m; ++i) {
        const double x =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
        double acc = 0.0;
        for (double v : values) {
            const double u = (x - v) / h;
            acc += std::exp(-0.5 * u * u);
        }
        result.x[i] = x;
        result.density[i] = acc * inv;
    }
    return result;
}

}  // namespace assetlens::econ
