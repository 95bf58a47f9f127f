#include "assetlens/pipeline/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"
#include "assetlens/pipeline/stats.hpp"

namespace assetlens::pipeline {

void split(Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InputError("train fraction must be in (0,1)");
    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    dataset.train_indices.assign(order.begin(), order.begin() + n_train);
    dataset.test_indices.assign(order.begin() + n_train, order.end());
    dataset.split_seed = seed;
}

namespace {

constexpr std::size_t kIntensityLevels = 64;

double skew_from_sums(double n, double s1, double s2, double s3) {
    if (n < 3.0) return std::numeric_limits<double>::infinity();
    const double mean = s1 / n;
    const double m2 = s2 / n - mean * mean;
    const double m3 = s3 / n - 3.0 * mean * (s2 / n) + 2.0 * mean * mean * mean;
    if (m2 <= 1e-12) return std::numeric_limits<double>::infinity();
    return m3 / std::pow(m2, 1.5);
}

}  // namespace

std::vector<NightCell> undersample_skew(const std::vector<NightCell>& cells,
                                        double target_skew, std::uint64_t seed) {
    if (cells.size() < 3) throw InputError("undersampling needs at least 3 cells");
    for (const NightCell& c : cells)
        if (c.intensity < 0 || c.intensity >= static_cast<int>(kIntensityLevels))
            throw InputError("night intensity out of range for cell " + c.cell_id);

    std::vector<double> intensities(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        intensities[i] = static_cast<double>(cells[i].intensity);
    const double initial = skewness(intensities);
    if (initial <= target_skew) return cells;

    // Cells grouped per intensity bin, each bin seeded-shuffled. The removal
    // order always drains the currently most frequent bin (lowest intensity
    // on ties), so only modal cells are ever removed and the modal bin is
    // re-evaluated as counts drop.
    std::array<std::vector<std::size_t>, kIntensityLevels> bins;
    for (std::size_t i = 0; i < cells.size(); ++i)
        bins[static_cast<std::size_t>(cells[i].intensity)].push_back(i);
    Rng rng(derive_seed(seed, "undersample"));
    for (auto& bin : bins) rng.shuffle(bin);

    std::array<std::size_t, kIntensityLevels> taken{};  // removed so far per bin
    const std::size_t n = cells.size();
    const std::size_t max_removals = n - 3;
    std::vector<std::size_t> removal_order;
    removal_order.reserve(max_removals);
    for (std::size_t step = 0; step < max_removals; ++step) {
        std::size_t best_bin = 0, best_count = 0;
        for (std::size_t b = 0; b < kIntensityLevels; ++b) {
            const std::size_t remaining = bins[b].size() - taken[b];
            if (remaining > best_count) {
                best_count = remaining;
                best_bin = b;
            }
        }
        removal_order.push_back(bins[best_bin][taken[best_bin]]);
        ++taken[best_bin];
    }

    // Prefix power sums along the removal order make skew(r) O(1).
    double total1 = 0.0, total2 = 0.0, total3 = 0.0;
    for (double v : intensities) {
        total1 += v;
        total2 += v * v;
        total3 += v * v * v;
    }
    std::vector<double> p1(max_removals + 1, 0.0), p2(max_removals + 1, 0.0),
        p3(max_removals + 1, 0.0);
    for (std::size_t r = 0; r < max_removals; ++r) {
        const double v = intensities[removal_order[r]];
        p1[r + 1] = p1[r] + v;
        p2[r + 1] = p2[r] + v * v;
        p3[r + 1] = p3[r] + v * v * v;
    }
    auto skew_after = [&](std::size_t r) {
        return skew_from_sums(static_cast<double>(n - r), total1 - p1[r],
                              total2 - p2[r], total3 - p3[r]);
    };

    std::size_t chosen;
    if (skew_after(max_removals) <= target_skew) {
        // Smallest removal count reaching the target, by bisection.
        std::size_t lo = 0, hi = max_removals;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (skew_after(mid) <= target_skew)
                hi = mid;
            else
                lo = mid + 1;
        }
        chosen = hi;
    } else {
        // Skew is not exactly monotone in the removal count; scan before
        // declaring the target unreachable.
        std::size_t found = max_removals + 1;
        double best = initial;
        for (std::size_t r = 0; r <= max_removals; ++r) {
            const double s = skew_after(r);
            if (std::isfinite(s)) best = std::min(best, s);
            if (s <= target_skew) {
                found = r;
                break;
            }
        }
        if (found > max_removals)
            throw InputError("cannot reach target skew " + std::to_string(target_skew) +
                             " by removing modal cells; best achieved " +
                             std::to_string(best));
        chosen = found;
    }

    std::vector<bool> removed(n, false);
    for (std::size_t r = 0; r < chosen; ++r) removed[removal_order[r]] = true;
    std::vector<NightCell> kept;
    kept.reserve(n - chosen);
    for (std::size_t i = 0; i < n; ++i)
        if (!removed[i]) kept.push_back(cells[i]);
    return kept;
}

}  // namespace assetlens::pipeline
