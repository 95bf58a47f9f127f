#pragma once

#include <string>
#include <vector>

namespace assetlens::csv {

// Minimal CSV table: one header row, then data rows of string cells.
// No quoting support; none of the formats in this project need it.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

Table read_file(const std::string& path);
Table parse(const std::string& text);
void write_file(const std::string& path, const Table& table);

// Canonical number formatting for CSV/JSON artifacts: shortest round-trip
// representation, so identical doubles serialize to identical bytes.
std::string format_double(double v);

}  // namespace assetlens::csv
