#include "assetlens/census/census.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "assetlens/common/csv.hpp"
#include "assetlens/common/error.hpp"

namespace assetlens::census {

const std::array<std::string, kIndicatorCount>& indicator_names() {
    static const std::array<std::string, kIndicatorCount> names = {
        "electronics",
        "water_treated",
        "water_untreated",
        "water_natural",
        "light_electricity",
        "light_oil",
        "has_phone",
        "transport_cycle",
        "transport_motorized",
        "no_assets",
        "banking_services",
        "cook_fuel_processed",
        "bathroom_within",
        "rooms_under_3",
        "household_size_under_5",
        "permanent_house",
    };
    return names;
}

const std::array<IndicatorFormula, kIndicatorCount>& aggregation_table() {
    // The electronics row sums four columns and divides by 3, reproduced as
    // the source table prints it.
    static const std::array<IndicatorFormula, kIndicatorCount> table = {{
        {{128, 129, 130, 131}, 3.0},
        {{72, 74, 77}, 1.0},
        {{73, 75}, 1.0},
        {{76, 78, 79, 80, 81}, 1.0},
        {{85, 87}, 1.0},
        {{86, 88, 89}, 1.0},
        {{132, 133, 134}, 1.0},
        {{135}, 1.0},
        {{136, 137}, 1.0},
        {{139}, 1.0},
        {{127}, 1.0},
        {{113, 114, 115}, 1.0},
        {{103, 104}, 1.0},
        {{49, 50, 51}, 1.0},
        {{56, 57, 58, 59}, 1.0},
        {{140}, 1.0},
    }};
    return table;
}

AssetVector aggregate_assets(const CensusRow& row) {
    AssetVector out;
    out.village_id = row.village_id;
    const auto& table = aggregation_table();
    for (std::size_t k = 0; k < kIndicatorCount; ++k) {
        double acc = 0.0;
        for (std::size_t column : table[k].columns) {
            const double v = row.columns[column];
            if (!std::isfinite(v))
                throw InputError("census column [" + std::to_string(column) +
                                 "] is not finite for village " + row.village_id);
            acc += v;
        }
        out.values[k] = acc / table[k].divisor;
    }
    return out;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;  // constant column -> 0
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace

std::vector<std::array<double, kIndicatorCount>> correlation_matrix(
    const std::vector<CensusRow>& rows) {
    if (rows.size() < 3)
        throw InputError("correlation matrix needs at least 3 rows, got " +
                         std::to_string(rows.size()));
    const std::size_t n = rows.size();
    std::vector<std::array<double, kIndicatorCount>> result(kRawColumnCount);

    std::vector<std::array<double, kIndicatorCount>> assets(n);
    for (std::size_t i = 0; i < n; ++i) assets[i] = aggregate_assets(rows[i]).values;

    std::vector<double> col(n), ind(n);
    for (std::size_t c = 1; c <= kRawColumnCount; ++c) {
        for (std::size_t i = 0; i < n; ++i) col[i] = rows[i].columns[c];
        for (std::size_t k = 0; k < kIndicatorCount; ++k) {
            for (std::size_t i = 0; i < n; ++i) ind[i] = assets[i][k];
            result[c - 1][k] = pearson(col, ind);
        }
    }
    return result;
}

PcaResult pca_first_component(const std::vector<AssetVector>& vectors) {
    const std::size_t n = vectors.size();
    if (n <= kIndicatorCount)
        throw InputError("pca needs more rows than dimensions (>=17), got " +
                         std::to_string(n));
    Eigen::MatrixXd x(n, kIndicatorCount);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                vectors[i][k];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw NumericError("pca eigendecomposition failed");
    const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
    Eigen::VectorXd dir = solver.eigenvectors().col(kIndicatorCount - 1);

    // Sign convention: the largest-magnitude loading is positive.
    Eigen::Index max_idx = 0;
    dir.cwiseAbs().maxCoeff(&max_idx);
    if (dir(max_idx) < 0.0) dir = -dir;

    PcaResult res;
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        res.direction[k] = dir(static_cast<Eigen::Index>(k));
    res.top_eigenvalue = evals(kIndicatorCount - 1);
    const double total = evals.sum();
    res.explained_variance_ratio = total > 0.0 ? res.top_eigenvalue / total : 0.0;
    res.covariance_rank =
        static_cast<int>((evals.array() > evals(kIndicatorCount - 1) * 1e-12).count());
    res.scores.resize(n);
    const Eigen::VectorXd proj = x * dir;
    for (std::size_t i = 0; i < n; ++i) res.scores[i] = proj(static_cast<Eigen::Index>(i));
    return res;
}

OutlierReport mahalanobis_filter(const std::vector<AssetVector>& vectors,
                                 double threshold, double ridge_scale) {
    const std::size_t n = vectors.size();
    if (n <= kIndicatorCount)
        throw InputError("mahalanobis filter needs more rows than dimensions, got " +
                         std::to_string(n));
    Eigen::MatrixXd x(n, kIndicatorCount);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                vectors[i][k];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    if (ridge_scale > 0.0) {
        const double eps = ridge_scale * cov.trace() / static_cast<double>(kIndicatorCount);
        cov.diagonal().array() += eps;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericError("covariance is numerically singular; cannot compute distances");

    OutlierReport report;
    report.threshold = threshold;
    report.village_ids.resize(n);
    report.distances.resize(n);
    report.rejected.resize(n);
    std::size_t rejected_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd d = x.row(static_cast<Eigen::Index>(i)).transpose();
        const Eigen::VectorXd solved = ldlt.solve(d);
        const double dist2 = d.dot(solved);
        if (!std::isfinite(dist2) || dist2 < -1e-9)
            throw NumericError("covariance is numerically singular; distance not finite");
        report.village_ids[i] = vectors[i].village_id;
        report.distances[i] = std::sqrt(std::max(dist2, 0.0));
        report.rejected[i] = report.distances[i] > threshold;
        if (report.rejected[i]) ++rejected_count;
    }
    report.rejection_fraction = static_cast<double>(rejected_count) / static_cast<double>(n);
    return report;
}

std::vector<CensusRow> read_census_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.empty() || t.header[0] != "village_id")
        throw InputError("census csv must start with a village_id column");
    std::vector<int> col_for_index(kRawColumnCount + 1, -1);
    for (std::size_t h = 1; h < t.header.size(); ++h) {
        const std::string& name = t.header[h];
        if (name.size() < 3 || name.front() != '[' || name.back() != ']')
            throw InputError("census csv header cell is not a bracketed index: " + name);
        const int idx = std::stoi(name.substr(1, name.size() - 2));
        if (idx < 1 || idx > static_cast<int>(kRawColumnCount))
            throw InputError("census column index out of range: " + name);
        col_for_index[static_cast<std::size_t>(idx)] = static_cast<int>(h);
    }
    // Every column referenced by the aggregation table must be present.
    for (const auto& formula : aggregation_table())
        for (std::size_t column : formula.columns)
            if (col_for_index[column] < 0)
                throw InputError("census csv is missing required column [" +
                                 std::to_string(column) + "]");

    std::vector<CensusRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& raw : t.rows) {
        CensusRow row;
        row.village_id = raw[0];
        for (std::size_t c = 1; c <= kRawColumnCount; ++c) {
            if (col_for_index[c] < 0) continue;
            row.columns[c] = std::stod(raw[static_cast<std::size_t>(col_for_index[c])]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_census_csv(const std::string& path, const std::vector<CensusRow>& rows) {
    csv::Table t;
    t.header.push_back("village_id");
    for (std::size_t c = 1; c <= kRawColumnCount; ++c)
        t.header.push_back("[" + std::to_string(c) + "]");
    for (const CensusRow& row : rows) {
        std::vector<std::string> cells;
        cells.push_back(row.village_id);
        for (std::size_t c = 1; c <= kRawColumnCount; ++c)
            cells.push_back(csv::format_double(row.columns[c]));
        t.rows.push_back(std::move(cells));
    }
    csv::write_file(path, t);
}

std::vector<AssetVector> read_assets_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.size() != kIndicatorCount + 1 || t.header[0] != "village_id")
        throw InputError("asset csv must have village_id plus the 16 indicators");
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        if (t.header[k + 1] != indicator_names()[k])
            throw InputError("asset csv column " + t.header[k + 1] +
                             " does not match expected indicator " + indicator_names()[k]);
    std::vector<AssetVector> assets;
    assets.reserve(t.rows.size());
    for (const auto& raw : t.rows) {
        AssetVector v;
        v.village_id = raw[0];
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            v.values[k] = std::stod(raw[k + 1]);
        assets.push_back(std::move(v));
    }
    return assets;
}

void write_assets_csv(const std::string& path, const std::vector<AssetVector>& assets) {
    csv::Table t;
    t.header.push_back("village_id");
    for (const auto& name : indicator_names()) t.header.push_back(name);
    for (const AssetVector& v : assets) {
        std::vector<std::string> cells;
        cells.push_back(v.village_id);
        for (double x : v.values) cells.push_back(csv::format_double(x));
        t.rows.push_back(std::move(cells));
    }
    csv::write_file(path, t);
}

void write_outlier_csv(const std::string& path, const OutlierReport& report) {
    csv::Table t;
    t.header = {"village_id", "mahalanobis_distance", "rejected", "threshold"};
    for (std::size_t i = 0; i < report.distances.size(); ++i) {
        t.rows.push_back({report.village_ids[i], csv::format_double(report.distances[i]),
                          report.rejected[i] ? "1" : "0",
                          csv::format_double(report.threshold)});
    }
    csv::write_file(path, t);
}

void write_correlation_csv(const std::string& path,
                           const std::vector<std::array<double, kIndicatorCount>>& matrix) {
    csv::Table t;
    t.header.push_back("column");
    for (const auto& name : indicator_names()) t.header.push_back(name);
    for (std::size_t c = 0; c < matrix.size(); ++c) {
        std::vector<std::string> cells;
        cells.push_back("[" + std::to_string(c + 1) + "]");
        for (double v : matrix[c]) cells.push_back(csv::format_double(v));
        t.rows.push_back(std::move(cells));
    }
    csv::write_file(path, t);
}

}  // namespace assetlens::census
