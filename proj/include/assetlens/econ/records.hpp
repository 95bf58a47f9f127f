#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace assetlens::econ {

// Flat table of district/village records: numeric columns (NaN = missing)
// plus categorical string columns (e.g. state).
struct RecordTable {
    std::vector<std::string> numeric_names;
    std::vector<std::vector<double>> numeric_columns;  // column-major
    std::vector<std::string> categorical_names;
    std::vector<std::vector<std::string>> categorical_columns;
    std::size_t rows = 0;

    int numeric_index(const std::string& name) const;
    int categorical_index(const std::string& name) const;
    const std::vector<double>& numeric(const std::string& name) const;
    const std::vector<std::string>& categorical(const std::string& name) const;

    RecordTable select_rows(const std::vector<std::size_t>& indices) const;
};

// CSV round trip. Columns whose every non-empty cell parses as a number are
// numeric; empty cells become NaN.
RecordTable read_records_csv(const std::string& path);
void write_records_csv(const std::string& path, const RecordTable& table);

// Synthetic village records with planted regression structure: a strong
// negative women's-education effect on the outcome, a pure-noise control,
// state categories with a dominant base state, and log-scale regressors.
struct EconSynthConfig {
    std::size_t villages = 20000;
    double education_effect = -0.5;   // per percentage point of women_lit
    double open_defecation_effect = 4.0;  // per unit of ln(opendefecation)
    double noise_sd = 8.0;
    std::uint64_t seed = 0;
};

RecordTable synth_econ_records(const EconSynthConfig& config);

}  // namespace assetlens::econ
