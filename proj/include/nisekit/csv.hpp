#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace nisekit::csv {

// Minimal numeric CSV: one header line, comma-separated double columns.
// Leading lines of the form "# key = value" carry metadata and are preserved
// on write. Values are printed with max_digits10 so read/write round-trips
// are bit-exact.

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return columns.size(); }

    // Column values by index.
    std::vector<double> column(std::size_t j) const;
    // Column index by name; throws ConfigError when absent.
    std::size_t column_index(const std::string& name) const;
};

Table read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Table& table);

std::string format_double(double v);

// FNV-1a, used for config/model hashes recorded in file metadata.
std::uint64_t fnv1a(const std::string& data);

}  // namespace nisekit::csv
