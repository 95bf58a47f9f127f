#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "assetlens/census/census.hpp"
#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"

using namespace assetlens;
using namespace assetlens::census;

namespace {

// Brute-force Mahalanobis oracle: explicit mean/covariance and Gaussian
// elimination, no shared code with the implementation.
std::vector<double> mahalanobis_oracle(const std::vector<AssetVector>& vectors) {
    const std::size_t n = vectors.size();
    const std::size_t d = kIndicatorCount;
    std::vector<double> mean(d, 0.0);
    for (const auto& v : vectors)
        for (std::size_t k = 0; k < d; ++k) mean[k] += v[k];
    for (double& m : mean) m /= static_cast<double>(n);

    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& v : vectors)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                cov[i][j] += (v[i] - mean[i]) * (v[j] - mean[j]);
    for (auto& row : cov)
        for (double& c : row) c /= static_cast<double>(n - 1);

    auto solve = [&](std::vector<double> b) {
        auto a = cov;
        const std::size_t m = d;
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < m; ++r)
                if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
            std::swap(a[col], a[pivot]);
            std::swap(b[col], b[pivot]);
            for (std::size_t r = col + 1; r < m; ++r) {
                const double f = a[r][col] / a[col][col];
                for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[col][c];
                b[r] -= f * b[col];
            }
        }
        std::vector<double> x(m);
        for (std::size_t r = m; r-- > 0;) {
            double acc = b[r];
            for (std::size_t c = r + 1; c < m; ++c) acc -= a[r][c] * x[c];
            x[r] = acc / a[r][r];
        }
        return x;
    };

    std::vector<double> distances(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> diff(d);
        for (std::size_t k = 0; k < d; ++k) diff[k] = vectors[i][k] - mean[k];
        const std::vector<double> solved = solve(diff);
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += diff[k] * solved[k];
        distances[i] = std::sqrt(std::max(acc, 0.0));
    }
    return distances;
}

std::vector<AssetVector> gaussian_vectors(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<AssetVector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].village_id = "g" + std::to_string(i);
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            out[i].values[k] = rng.next_gaussian();
    }
    return out;
}

}  // namespace

TEST_CASE("aggregate_assets follows the published column table") {
    CensusRow row;
    row.village_id = "x";
    SUBCASE("all zero columns give all zero indicators") {
        const AssetVector v = aggregate_assets(row);
        for (double x : v.values) CHECK(x == 0.0);
    }
    SUBCASE("electronics sums four columns over 3") {
        row.columns[128] = row.columns[129] = row.columns[130] = row.columns[131] = 30.0;
        const AssetVector v = aggregate_assets(row);
        CHECK(v[kElectronics] == doctest::Approx(40.0));
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            if (k != kElectronics) CHECK(v[k] == 0.0);
    }
    SUBCASE("water-treated = [72]+[74]+[77]") {
        row.columns[72] = 10.0;
        row.columns[74] = 20.0;
        row.columns[77] = 5.0;
        const AssetVector v = aggregate_assets(row);
        CHECK(v[kWaterTreated] == doctest::Approx(35.0));
    }
    SUBCASE("household-size-under-5 = [56]+[57]+[58]+[59]") {
        row.columns[56] = 1.0;
        row.columns[57] = 2.0;
        row.columns[58] = 3.0;
        row.columns[59] = 4.0;
        CHECK(aggregate_assets(row)[kHouseholdSizeUnder5] == doctest::Approx(10.0));
    }
    SUBCASE("identity columns") {
        row.columns[135] = 42.0;
        row.columns[127] = 13.0;
        row.columns[139] = 7.0;
        row.columns[140] = 88.0;
        const AssetVector v = aggregate_assets(row);
        CHECK(v[kTransportCycle] == 42.0);
        CHECK(v[kBankingServices] == 13.0);
        CHECK(v[kNoAssets] == 7.0);
        CHECK(v[kPermanentHouse] == 88.0);
    }
}

TEST_CASE("aggregate_assets is linear in the input columns") {
    Rng rng(101);
    CensusRow row;
    for (std::size_t c = 1; c <= kRawColumnCount; ++c)
        row.columns[c] = 100.0 * rng.next_double();
    const AssetVector base = aggregate_assets(row);

    const double scale = 3.25;
    CensusRow scaled = row;
    for (std::size_t c = 1; c <= kRawColumnCount; ++c) scaled.columns[c] *= scale;
    const AssetVector scaled_out = aggregate_assets(scaled);
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        CHECK(scaled_out[k] == doctest::Approx(scale * base[k]).epsilon(1e-12));

    // Additivity on a second random row.
    CensusRow other;
    for (std::size_t c = 1; c <= kRawColumnCount; ++c)
        other.columns[c] = 100.0 * rng.next_double();
    CensusRow sum = row;
    for (std::size_t c = 1; c <= kRawColumnCount; ++c) sum.columns[c] += other.columns[c];
    const AssetVector a = aggregate_assets(other);
    const AssetVector s = aggregate_assets(sum);
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        CHECK(s[k] == doctest::Approx(base[k] + a[k]).epsilon(1e-12));
}

TEST_CASE("census csv ingestion reports missing required columns") {
    const char* path = "census_missing.csv";
    {
        std::ofstream out(path);
        out << "village_id,[1],[2]\nv0,1.0,2.0\n";
    }
    CHECK_THROWS_WITH_AS(read_census_csv(path),
                         doctest::Contains("missing required column [128]"), InputError);
    std::remove(path);
}

TEST_CASE("correlation matrix: identity columns, degenerate columns, bounds") {
    Rng rng(55);
    std::vector<CensusRow> rows(40);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].village_id = "v" + std::to_string(i);
        for (std::size_t c = 1; c <= kRawColumnCount; ++c)
            rows[i].columns[c] = 100.0 * rng.next_double();
        rows[i].columns[17] = 5.0;  // constant column
    }
    const auto matrix = correlation_matrix(rows);
    REQUIRE(matrix.size() == kRawColumnCount);

    CHECK(matrix[135 - 1][kTransportCycle] == doctest::Approx(1.0));
    CHECK(matrix[127 - 1][kBankingServices] == doctest::Approx(1.0));
    CHECK(matrix[139 - 1][kNoAssets] == doctest::Approx(1.0));
    CHECK(matrix[140 - 1][kPermanentHouse] == doctest::Approx(1.0));
    for (std::size_t k = 0; k < kIndicatorCount; ++k) CHECK(matrix[17 - 1][k] == 0.0);
    for (const auto& row : matrix)
        for (double r : row) {
            CHECK(r <= 1.0);
            CHECK(r >= -1.0);
        }

    CHECK_THROWS_AS(correlation_matrix({rows[0], rows[1]}), InputError);
}

TEST_CASE("pca_first_component: single-axis data recovers the axis") {
    Rng rng(7);
    std::vector<AssetVector> vectors(50);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        vectors[i].values[3] = rng.next_gaussian();  // all variance on axis 3
    const PcaResult res = pca_first_component(vectors);
    CHECK(std::abs(res.direction[3]) == doctest::Approx(1.0));
    CHECK(res.direction[3] > 0.0);  // sign convention
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        if (k != 3) CHECK(res.direction[k] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("pca_first_component: isotropic planar cloud explains half the variance") {
    Rng rng(13);
    std::vector<AssetVector> vectors(2000);
    for (auto& v : vectors) {
        v.values[2] = rng.next_gaussian();
        v.values[9] = rng.next_gaussian();
    }
    const PcaResult res = pca_first_component(vectors);
    CHECK(res.explained_variance_ratio == doctest::Approx(0.5).epsilon(0.12));
    CHECK(res.covariance_rank == 2);

    double sum = 0.0, var = 0.0;
    for (double s : res.scores) sum += s;
    CHECK(std::abs(sum / static_cast<double>(res.scores.size())) < 1e-10);
    for (double s : res.scores) var += s * s;
    var /= static_cast<double>(res.scores.size() - 1);
    CHECK(var == doctest::Approx(res.top_eigenvalue).epsilon(1e-8));
}

TEST_CASE("pca requires more rows than dimensions") {
    CHECK_THROWS_AS(pca_first_component(gaussian_vectors(16, 1)), InputError);
}

TEST_CASE("mahalanobis: the sample mean has distance zero") {
    // Symmetric data: pairs mu +- delta plus mu itself.
    Rng rng(77);
    AssetVector mu;
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        mu.values[k] = 10.0 + rng.next_double();
    std::vector<AssetVector> vectors;
    for (std::size_t p = 0; p < 20; ++p) {
        AssetVector up = mu, down = mu;
        for (std::size_t k = 0; k < kIndicatorCount; ++k) {
            const double d = rng.next_gaussian();
            up.values[k] += d;
            down.values[k] -= d;
        }
        vectors.push_back(up);
        vectors.push_back(down);
    }
    mu.village_id = "center";
    vectors.push_back(mu);
    const OutlierReport report = mahalanobis_filter(vectors, 30.0, 0.0);
    CHECK(report.distances.back() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_FALSE(report.rejected.back());
}

TEST_CASE("mahalanobis: threshold 30 keeps standard-normal data") {
    const auto vectors = gaussian_vectors(500, 3);
    const OutlierReport report = mahalanobis_filter(vectors);
    CHECK(report.rejection_fraction == 0.0);
    // chi(16) has essentially no mass above 30: even above 10 is ~1e-13.
    for (double d : report.distances) CHECK(d < 10.0);
}

TEST_CASE("mahalanobis: planted 100-sigma outliers are exactly the rejects") {
    // Each outlier is shifted 100 sigma along its own random direction. The
    // contamination still inflates the covariance, which caps contaminated
    // distances near sqrt(d/f) ~ 17.9 at a 5% fraction; threshold 12 sits
    // between that band and the clean chi(16) bulk.
    auto vectors = gaussian_vectors(400, 9);
    Rng rng(19);
    std::set<std::size_t> planted;
    while (planted.size() < 20) planted.insert(rng.next_below(vectors.size()));
    for (std::size_t i : planted) {
        std::array<double, kIndicatorCount> dir{};
        double norm = 0.0;
        for (double& d : dir) {
            d = rng.next_gaussian();
            norm += d * d;
        }
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            vectors[i].values[k] += 100.0 * dir[k] / norm;
    }

    const OutlierReport report = mahalanobis_filter(vectors, 12.0);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        CHECK(report.rejected[i] == (planted.count(i) > 0));
    CHECK(report.rejection_fraction == doctest::Approx(0.05));

    // Distances agree with the brute-force oracle (ridge off).
    const OutlierReport no_ridge = mahalanobis_filter(vectors, 12.0, 0.0);
    const std::vector<double> oracle = mahalanobis_oracle(vectors);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        CHECK(no_ridge.distances[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
}

TEST_CASE("mahalanobis distance is affine invariant (ridge disabled)") {
    const auto vectors = gaussian_vectors(300, 21);
    // Random well-conditioned affine map: diagonal scaling + shear + shift.
    Rng rng(23);
    std::array<double, kIndicatorCount> scale{}, shift{};
    for (std::size_t k = 0; k < kIndicatorCount; ++k) {
        scale[k] = 0.5 + rng.next_double();
        shift[k] = 10.0 * rng.next_gaussian();
    }
    std::vector<AssetVector> mapped = vectors;
    for (auto& v : mapped) {
        AssetVector t = v;
        for (std::size_t k = 0; k < kIndicatorCount; ++k) {
            double acc = scale[k] * v[k] + shift[k];
            if (k > 0) acc += 0.3 * v[k - 1];  // shear keeps the map invertible
            t.values[k] = acc;
        }
        v = t;
    }
    const OutlierReport a = mahalanobis_filter(vectors, 30.0, 0.0);
    const OutlierReport b = mahalanobis_filter(mapped, 30.0, 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        CHECK(a.distances[i] == doctest::Approx(b.distances[i]).epsilon(1e-8));
}

TEST_CASE("asset csv round trip") {
    const auto vectors = gaussian_vectors(20, 31);
    const char* path = "assets_roundtrip.csv";
    write_assets_csv(path, vectors);
    const auto back = read_assets_csv(path);
    REQUIRE(back.size() == vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        CHECK(back[i].village_id == vectors[i].village_id);
        for (std::size_t k = 0; k < kIndicatorCount; ++k)
            CHECK(back[i][k] == vectors[i][k]);
    }
    std::remove(path);
}
