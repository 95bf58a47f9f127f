#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "assetlens/econ/ols.hpp"

namespace assetlens::econ {

// Counts of runs significant at each level, split by coefficient sign.
// Levels are cumulative: a 1%-significant run also counts at 5% and 10%.
struct SignificanceTally {
    std::size_t positive_1 = 0, positive_5 = 0, positive_10 = 0;
    std::size_t negative_1 = 0, negative_5 = 0, negative_10 = 0;

    std::size_t at_5() const { return positive_5 + negative_5; }
    std::size_t at_1() const { return positive_1 + negative_1; }
    std::size_t at_10() const { return positive_10 + negative_10; }
};

struct MonteCarloReport {
    std::vector<std::string> variable_names;                 // design columns
    std::vector<SignificanceTally> tallies;                  // parallel
    std::vector<std::vector<double>> coefficient_samples;    // per variable
    std::size_t runs = 0;
    std::size_t sample_size = 0;
    std::vector<std::size_t> skipped_runs;                   // rank-deficient runs
};

// Repeated regression on seeded uniform samples without replacement.
// Rank-deficient runs are recorded in skipped_runs, never silently dropped.
MonteCarloReport repeated_sampling(const RecordTable& records, const SpecModel& spec,
                                   std::size_t sample_size = 3500,
                                   std::size_t runs = 100, std::uint64_t seed = 0);

std::string monte_carlo_to_json(const MonteCarloReport& report);

}  // namespace assetlens::econ
