#include "nisekit/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nisekit/errors.hpp"

namespace nisekit::csv {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, const std::filesystem::path& path, std::size_t line_no) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": cannot parse number '" + token + "'");
    }
    return v;
}

}  // namespace

std::vector<double> Table::column(std::size_t j) const {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].at(j);
    return out;
}

std::size_t Table::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("missing CSV column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            auto eq = s.find('=');
            if (eq != std::string::npos) {
                std::string key = trim(s.substr(1, eq - 1));
                std::string value = trim(s.substr(eq + 1));
                if (!key.empty()) t.metadata[key] = value;
            }
            continue;
        }
        std::vector<std::string> tokens;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) tokens.push_back(trim(tok));
        if (!have_header) {
            t.columns = tokens;
            have_header = true;
            continue;
        }
        if (tokens.size() != t.columns.size()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected " + std::to_string(t.columns.size()) +
                              " fields, got " + std::to_string(tokens.size()));
        }
        std::vector<double> row(tokens.size());
        for (std::size_t j = 0; j < tokens.size(); ++j) row[j] = parse_double(tokens[j], path, line_no);
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw ConfigError("empty CSV file: " + path.string());
    return t;
}

void write_file(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    for (const auto& [key, value] : table.metadata) out << "# " << key << " = " << value << "\n";
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        out << table.columns[j] << (j + 1 < table.columns.size() ? "," : "\n");
    }
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << format_double(row[j]) << (j + 1 < row.size() ? "," : "\n");
        }
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace nisekit::csv
