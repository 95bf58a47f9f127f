#include "assetlens/econ/records.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "assetlens/common/csv.hpp"
#include "assetlens/common/error.hpp"
#include "assetlens/common/rng.hpp"

namespace assetlens::econ {

int RecordTable::numeric_index(const std::string& name) const {
    for (std::size_t i = 0; i < numeric_names.size(); ++i)
        if (numeric_names[i] == name) return static_cast<int>(i);
    return -1;
}

int RecordTable::categorical_index(const std::string& name) const {
    for (std::size_t i = 0; i < categorical_names.size(); ++i)
        if (categorical_names[i] == name) return static_cast<int>(i);
    return -1;
}

const std::vector<double>& RecordTable::numeric(const std::string& name) const {
    const int i = numeric_index(name);
    if (i < 0) throw InputError("records have no numeric column: " + name);
    return numeric_columns[static_cast<std::size_t>(i)];
}

const std::vector<std::string>& RecordTable::categorical(const std::string& name) const {
    const int i = categorical_index(name);
    if (i < 0) throw InputError("records have no categorical column: " + name);
    return categorical_columns[static_cast<std::size_t>(i)];
}

RecordTable RecordTable::select_rows(const std::vector<std::size_t>& indices) const {
    RecordTable out;
    out.numeric_names = numeric_names;
    out.categorical_names = categorical_names;
    out.rows = indices.size();
    out.numeric_columns.resize(numeric_columns.size());
    for (std::size_t c = 0; c < numeric_columns.size(); ++c) {
        out.numeric_columns[c].reserve(indices.size());
        for (std::size_t i : indices) out.numeric_columns[c].push_back(numeric_columns[c][i]);
    }
    out.categorical_columns.resize(categorical_columns.size());
    for (std::size_t c = 0; c < categorical_columns.size(); ++c) {
        out.categorical_columns[c].reserve(indices.size());
        for (std::size_t i : indices)
            out.categorical_columns[c].push_back(categorical_columns[c][i]);
    }
    return out;
}

namespace {

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

RecordTable read_records_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    RecordTable table;
    table.rows = t.rows.size();
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        bool numeric = true;
        for (const auto& row : t.rows) {
            double v;
            if (!row[c].empty() && !parse_double(row[c], v)) {
                numeric = false;
                break;
            }
        }
        if (numeric) {
            std::vector<double> col;
            col.reserve(t.rows.size());
            for (const auto& row : t.rows) {
                double v = std::numeric_limits<double>::quiet_NaN();
                if (!row[c].empty()) parse_double(row[c], v);
                col.push_back(v);
            }
            table.numeric_names.push_back(t.header[c]);
            table.numeric_columns.push_back(std::move(col));
        } else {
            std::vector<std::string> col;
            col.reserve(t.rows.size());
            for (const auto& row : t.rows) col.push_back(row[c]);
            table.categorical_names.push_back(t.header[c]);
            table.categorical_columns.push_back(std::move(col));
        }
    }
    return table;
}

void write_records_csv(const std::string& path, const RecordTable& table) {
    csv::Table t;
    for (const auto& n : table.categorical_names) t.header.push_back(n);
    for (const auto& n : table.numeric_names) t.header.push_back(n);
    for (std::size_t r = 0; r < table.rows; ++r) {
        std::vector<std::string> cells;
        for (const auto& col : table.categorical_columns) cells.push_back(col[r]);
        for (const auto& col : table.numeric_columns)
            cells.push_back(std::isnan(col[r]) ? "" : csv::format_double(col[r]));
        t.rows.push_back(std::move(cells));
    }
    csv::write_file(path, t);
}

RecordTable synth_econ_records(const EconSynthConfig& config) {
    const std::size_t n = config.villages;
    Rng rng(derive_seed(config.seed, "econ.synth"));

    // Uttar Pradesh is the dominant base state.
    static const char* kStates[] = {"UP", "BR", "JH", "WB", "PJ", "HR"};
    static const double kStateShare[] = {0.40, 0.16, 0.10, 0.14, 0.10, 0.10};
    static const double kStateEffect[] = {0.0, 2.0, 1.0, -1.5, -3.0, -2.0};

    std::vector<std::string> state(n);
    std::vector<double> state_effect(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.next_double();
        double acc = 0.0;
        std::size_t pick = 0;
        for (std::size_t s = 0; s < 6; ++s) {
            acc += kStateShare[s];
            if (u < acc) {
                pick = s;
                break;
            }
        }
        state[i] = kStates[pick];
        state_effect[i] = kStateEffect[pick];
    }

    std::vector<double> opendefecation(n), mpce(n), kcal2(n), kcal_cereal(n),
        householdsizeunder5(n), literacy_rate(n), women_lit(n), mom_folic(n),
        women_sec_edu(n), mom_full_ant_care(n), ceasarean_birth(n), children_vita(n),
        women_bmi_below_norm(n), clean_fuel(n), permanent_house(n), noise_ctrl(n),
        stunting(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.next_double();  // latent development
        opendefecation[i] = std::max(0.5, 5.0 + 80.0 * (1.0 - z) +
                                              5.0 * rng.next_gaussian());
        mpce[i] = std::max(200.0, 600.0 + 2400.0 * z + 150.0 * rng.next_gaussian());
        kcal2[i] = 1400.0 + 900.0 * z + 80.0 * rng.next_gaussian();
        kcal_cereal[i] = 1200.0 + 300.0 * (1.0 - z) + 60.0 * rng.next_gaussian();
        householdsizeunder5[i] = 30.0 + 40.0 * z + 4.0 * rng.next_gaussian();
        literacy_rate[i] = 35.0 + 50.0 * z + 5.0 * rng.next_gaussian();
        women_lit[i] = 20.0 + 60.0 * z + 6.0 * rng.next_gaussian();
        mom_folic[i] = 15.0 + 55.0 * z + 7.0 * rng.next_gaussian();
        women_sec_edu[i] = 10.0 + 50.0 * z + 6.0 * rng.next_gaussian();
        mom_full_ant_care[i] = 10.0 + 45.0 * z + 7.0 * rng.next_gaussian();
        ceasarean_birth[i] = 5.0 + 20.0 * z + 4.0 * rng.next_gaussian();
        children_vita[i] = 30.0 + 50.0 * z + 6.0 * rng.next_gaussian();
        women_bmi_below_norm[i] = 15.0 + 30.0 * (1.0 - z) + 5.0 * rng.next_gaussian();
        clean_fuel[i] = 5.0 + 55.0 * z + 6.0 * rng.next_gaussian();
        permanent_house[i] = 25.0 + 60.0 * z + 5.0 * rng.next_gaussian();
        noise_ctrl[i] = rng.next_gaussian();

        stunting[i] = 25.0 + config.open_defecation_effect * std::log(opendefecation[i]) +
                      config.education_effect * women_lit[i] +
                      -0.004 * kcal2[i] + 0.006 * kcal_cereal[i] +
                      -0.05 * householdsizeunder5[i] - 0.06 * women_sec_edu[i] +
                      0.05 * women_bmi_below_norm[i] - 0.03 * children_vita[i] +
                      state_effect[i] + config.noise_sd * rng.next_gaussian();
    }

    RecordTable table;
    table.rows = n;
    table.categorical_names = {"state"};
    table.categorical_columns = {std::move(state)};
    table.numeric_names = {"stunting", "opendefecation", "mpce", "kcal2",
                           "kcal_cereal", "householdsizeunder5", "literacy_rate",
                           "women_lit", "mom_folic", "women_sec_edu",
                           "mom_full_ant_care", "ceasarean_birth", "children_vita",
                           "women_bmi_below_norm", "clean_fuel", "permanent_house",
                           "noise_ctrl"};
    table.numeric_columns = {std::move(stunting),
                             std::move(opendefecation),
                             std::move(mpce),
                             std::move(kcal2),
                             std::move(kcal_cereal),
                             std::move(householdsizeunder5),
                             std::move(literacy_rate),
                             std::move(women_lit),
                             std::move(mom_folic),
                             std::move(women_sec_edu),
                             std::move(mom_full_ant_care),
                             std::move(ceasarean_birth),
                             std::move(children_vita),
                             std::move(women_bmi_below_norm),
                             std::move(clean_fuel),
                             std::move(permanent_house),
                             std::move(noise_ctrl)};
    return table;
}

}  // namespace assetlens::econ
