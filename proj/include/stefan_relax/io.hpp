#pragma once

// Result files: comma-separated tables with a one-line header, numbers at 17
// significant digits so that reading a file back gives the same doubles.

#include "stefan_relax/analysis.hpp"
#include "stefan_relax/errors.hpp"
#include "stefan_relax/problem.hpp"

#include <fmt/format.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stefan_relax {

/// Failure to read or write a result file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return j;
        throw IoError("table has no column '" + std::string(name) + "'");
    }
    std::vector<double> values(std::string_view name) const {
        const auto j = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[j]);
        return out;
    }
};

inline std::string format_number(double x) { return fmt::format("{:.17g}", x); }

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (j) out += ',';
        out += t.header[j];
    }
    out += '\n';
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) throw IoError("table row width does not match the header");
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out += ',';
            out += format_number(r[j]);
        }
        out += '\n';
    }
    return out;
}

/// Parses a table; malformed rows are reported by 1-based line number.
inline Table from_csv(std::string_view text) {
    Table t;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw IoError("result file: missing header");
    {
        std::istringstream h(line);
        std::string name;
        while (std::getline(h, name, ',')) t.header.push_back(name);
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            const auto end = comma == std::string::npos ? line.size() : comma;
            double x = 0.0;
            const auto r = std::from_chars(line.data() + pos, line.data() + end, x);
            if (r.ec != std::errc{} || r.ptr != line.data() + end)
                throw IoError("result file line " + std::to_string(lineno) + ": bad number");
            row.push_back(x);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() != t.header.size())
            throw IoError("result file line " + std::to_string(lineno) + ": expected " +
                          std::to_string(t.header.size()) + " columns, got " + std::to_string(row.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write to " + path.string() + " failed");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_table(const std::filesystem::path& path, const Table& t) { write_text(path, to_csv(t)); }
inline Table read_table(const std::filesystem::path& path) { return from_csv(read_text(path)); }

/// Columns t, node_0 ... node_{n-1}, one row per time level.
inline Table field_table(const std::vector<double>& times, const std::vector<Field>& field) {
    if (times.size() != field.size()) throw IoError("field table: times and levels differ in number");
    Table t;
    t.header.push_back("t");
    const std::size_t n = field.empty() ? 0 : field.front().size();
    for (std::size_t i = 0; i < n; ++i) t.header.push_back(fmt::format("node_{}", i));
    for (std::size_t k = 0; k < field.size(); ++k) {
        std::vector<double> row{times[k]};
        row.insert(row.end(), field[k].begin(), field[k].end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols{"eps",
                                               "err_theta_L2Q",
                                               "err_chihat_L2Q",
                                               "norm_theta_L2Q",
                                               "norm_thetahat_LinfV",
                                               "sqrt_eps_norm_theta_L2V",
                                               "norm_chi_LinfQ",
                                               "eps_norm_chiprime_L2Q",
                                               "eta",
                                               "iters_max",
                                               "wall_ms"};
    return cols;
}

/// Failed rows are written as NaN apart from eps.
inline Table sweep_table(const SweepResult& s, bool record_timing) {
    Table t;
    t.header = sweep_columns();
    for (const auto& r : s.rows) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const bool ok = !r.error;
        const auto& e = r.estimates;
        t.rows.push_back({r.eps, ok ? r.err_theta_L2Q : nan, ok ? r.err_chihat_L2Q : nan,
                          ok ? e.norm_theta_L2Q : nan, ok ? e.norm_thetahat_LinfV : nan,
                          ok ? e.sqrt_eps_norm_theta_L2V : nan, ok ? e.norm_chi_LinfQ : nan,
                          ok ? e.eps_norm_chiprime_L2Q : nan, ok ? e.eta : nan,
                          ok ? static_cast<double>(r.iters_max) : nan, record_timing ? r.wall_ms : 0.0});
    }
    return t;
}

inline const std::vector<std::string>& estimate_columns() {
    static const std::vector<std::string> cols{"eps",
                                               "norm_theta_L2Q",
                                               "norm_thetahat_LinfV",
                                               "sqrt_eps_norm_theta_L2V",
                                               "norm_chi_LinfQ",
                                               "eps_norm_chiprime_L2Q",
                                               "eta"};
    return cols;
}

inline std::vector<double> estimate_row(const EstimateReport& e) {
    return {e.eps, e.norm_theta_L2Q, e.norm_thetahat_LinfV, e.sqrt_eps_norm_theta_L2V,
            e.norm_chi_LinfQ, e.eps_norm_chiprime_L2Q, e.eta};
}

}  // namespace stefan_relax
