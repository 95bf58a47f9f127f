#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace assetlens::census {

inline constexpr std::size_t kRawColumnCount = 140;
inline constexpr std::size_t kIndicatorCount = 16;

// One village's raw indicator columns, indexed by the census bracket numbers
// [1]..[140]. Values are percentages of households.
struct CensusRow {
    std::string village_id;
    std::array<double, kRawColumnCount + 1> columns{};  // columns[1..140]; [0] unused
};

// The 16 aggregated indicators, in fixed order.
enum Indicator : std::size_t {
    kElectronics = 0,
    kWaterTreated,
    kWaterUntreated,
    kWaterNatural,
    kLightElectricity,
    kLightOil,
    kHasPhone,
    kTransportCycle,
    kTransportMotorized,
    kNoAssets,
    kBankingServices,
    kCookFuelProcessed,
    kBathroomWithin,
    kRoomsUnder3,
    kHouseholdSizeUnder5,
    kPermanentHouse,
};

const std::array<std::string, kIndicatorCount>& indicator_names();

struct AssetVector {
    std::string village_id;
    std::array<double, kIndicatorCount> values{};

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

// Weighted-sum aggregation of the raw columns into the 16 indicators.
// Values are not clamped; weighted sums may exceed 100.
AssetVector aggregate_assets(const CensusRow& row);

// Raw column indices feeding each indicator: the indicator is the plain sum
// of the columns divided by the divisor, evaluated in exactly that order so
// the arithmetic matches the printed formulas bit for bit.
struct IndicatorFormula {
    std::vector<std::size_t> columns;
    double divisor = 1.0;
};
const std::array<IndicatorFormula, kIndicatorCount>& aggregation_table();

// Pearson correlation of each raw column [1..140] against each indicator.
// Degenerate (constant) columns or indicators yield 0. Requires >= 3 rows.
// Result is row-major 140x16: result[c-1][k].
std::vector<std::array<double, kIndicatorCount>> correlation_matrix(
    const std::vector<CensusRow>& rows);

struct PcaResult {
    std::array<double, kIndicatorCount> direction{};  // unit norm, sign-fixed
    std::vector<double> scores;                       // centered projections
    double top_eigenvalue = 0.0;
    double explained_variance_ratio = 0.0;
    int covariance_rank = 0;
};

// Leading principal component of the asset vectors. Sign is fixed so the
// largest-magnitude loading is positive. Requires more rows than dimensions.
PcaResult pca_first_component(const std::vector<AssetVector>& vectors);

struct OutlierReport {
    std::vector<std::string> village_ids;
    std::vector<double> distances;
    std::vector<bool> rejected;  // rejected[i] <=> distances[i] > threshold
    double threshold = 30.0;
    double rejection_fraction = 0.0;
};

// Mahalanobis distances against the ridge-regularized sample covariance.
// ridge_scale=0 disables the ridge (epsilon = ridge_scale * trace(cov)/16).
OutlierReport mahalanobis_filter(const std::vector<AssetVector>& vectors,
                                 double threshold = 30.0,
                                 double ridge_scale = 1e-6);

// CSV: header "village_id,[1],...,[140]", percentage values as decimals.
std::vector<CensusRow> read_census_csv(const std::string& path);
void write_census_csv(const std::string& path, const std::vector<CensusRow>& rows);

// CSV: header "village_id,<16 indicator names>".
std::vector<AssetVector> read_assets_csv(const std::string& path);
void write_assets_csv(const std::string& path, const std::vector<AssetVector>& assets);

void write_outlier_csv(const std::string& path, const OutlierReport& report);
void write_correlation_csv(const std::string& path,
                           const std::vector<std::array<double, kIndicatorCount>>& matrix);

}  // namespace assetlens::census
