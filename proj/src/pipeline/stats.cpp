#include "assetlens/pipeline/stats.hpp"

#include <algorithm>
#include <numeric>

#include "assetlens/common/error.hpp"

namespace assetlens::pipeline {

double skewness(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 3) throw InputError("skewness needs at least 3 values");
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 <= 0.0) throw InputError("skewness undefined for zero-variance data");
    return m3 / std::pow(m2, 1.5);
}

R2Report r2_score(const nn::Tensor& pred, const nn::Tensor& actual) {
    if (!pred.same_shape(actual))
        throw InputError("r2_score: prediction and target shapes differ");
    if (pred.shape.size() != 2)
        throw InputError("r2_score expects (N,D) tensors");
    const std::size_t n = pred.shape[0];
    const std::size_t d = pred.shape[1];
    if (n < 2) throw InputError("r2_score needs at least 2 samples");

    R2Report rep;
    rep.sample_count = n;
    rep.per_indicator.assign(d, std::numeric_limits<double>::quiet_NaN());
    rep.defined.assign(d, false);

    double weighted = 0.0, weight_sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += actual.at2(i, j);
        mean /= static_cast<double>(n);
        double ss_tot = 0.0, ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = actual.at2(i, j) - mean;
            const double dr = actual.at2(i, j) - pred.at2(i, j);
            ss_tot += dy * dy;
            ss_res += dr * dr;
        }
        if (ss_tot <= 0.0) continue;  // undefined indicator
        const double r2 = 1.0 - ss_res / ss_tot;
        rep.per_indicator[j] = r2;
        rep.defined[j] = true;
        const double var = ss_tot / static_cast<double>(n);
        weighted += var * r2;
        weight_sum += var;
    }
    rep.overall = weight_sum > 0.0 ? weighted / weight_sum : 0.0;
    return rep;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw InputError("spearman needs two equal-length series of >= 2 values");
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace assetlens::pipeline
