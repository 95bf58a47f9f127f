#include "assetlens/econ/montecarlo.hpp"

#include <numeric>

#include <json.hpp>

#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"

namespace assetlens::econ {

MonteCarloReport repeated_sampling(const RecordTable& records, const SpecModel& spec,
                                   std::size_t sample_size, std::size_t runs,
                                   std::uint64_t seed) {
    // Build the design once over all rows; each run samples design rows.
    // Per-row transforms and drops are row-local, so this matches building
    // the design per subsample, only faster.
    const Design design = build_design(records, spec);
    const std::size_t usable = design.kept_rows.size();
    if (usable < sample_size)
        throw InputError("repeated sampling needs at least " +
                         std::to_string(sample_size) + " usable rows, have " +
                         std::to_string(usable));

    MonteCarloReport report;
    report.variable_names = design.column_names;
    report.tallies.assign(design.column_names.size(), {});
    report.coefficient_samples.assign(design.column_names.size(), {});
    report.runs = runs;
    report.sample_size = sample_size;

    std::vector<std::size_t> order(usable);
    for (std::size_t run = 0; run < runs; ++run) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(seed, "montecarlo.run", run));
        // Partial Fisher-Yates: the first sample_size entries are a uniform
        // sample without replacement.
        for (std::size_t i = 0; i < sample_size; ++i) {
            const std::size_t j = i + rng.next_below(usable - i);
            std::swap(order[i], order[j]);
        }
        Eigen::MatrixXd x(sample_size, design.x.cols());
        Eigen::VectorXd y(sample_size);
        for (std::size_t i = 0; i < sample_size; ++i) {
            x.row(static_cast<Eigen::Index>(i)) =
                design.x.row(static_cast<Eigen::Index>(order[i]));
            y(static_cast<Eigen::Index>(i)) =
                design.y(static_cast<Eigen::Index>(order[i]));
        }

        OlsFit fit;
        try {
            fit = ols_fit(x, y, design.column_names);
        } catch (const NumericError&) {
            report.skipped_runs.push_back(run);
            continue;
        }
        for (std::size_t v = 0; v < design.column_names.size(); ++v) {
            const double coef = fit.coef(static_cast<Eigen::Index>(v));
            const double p = fit.p(static_cast<Eigen::Index>(v));
            report.coefficient_samples[v].push_back(coef);
            SignificanceTally& tally = report.tallies[v];
            if (p < 0.10) (coef > 0.0 ? tally.positive_10 : tally.negative_10)++;
            if (p < 0.05) (coef > 0.0 ? tally.positive_5 : tally.negative_5)++;
            if (p < 0.01) (coef > 0.0 ? tally.positive_1 : tally.negative_1)++;
        }
    }
    return report;
}

std::string monte_carlo_to_json(const MonteCarloReport& report) {
    nlohmann::json j;
    j["runs"] = report.runs;
    j["sample_size"] = report.sample_size;
    j["skipped_runs"] = report.skipped_runs;
    nlohmann::json vars = nlohmann::json::array();
    for (std::size_t v = 0; v < report.variable_names.size(); ++v) {
        nlohmann::json jv;
        jv["name"] = report.variable_names[v];
        const SignificanceTally& t = report.tallies[v];
        jv["significant"] = {
            {"positive", {{"p01", t.positive_1}, {"p05", t.positive_5}, {"p10", t.positive_10}}},
            {"negative", {{"p01", t.negative_1}, {"p05", t.negative_5}, {"p10", t.negative_10}}},
        };
        jv["coefficients"] = report.coefficient_samples[v];
        vars.push_back(std::move(jv));
    }
    j["variables"] = std::move(vars);
    return j.dump(2);
}

}  // namespace assetlens::econ
