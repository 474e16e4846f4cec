#include "qts/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "qts/scenario.hpp"

namespace qts::cli {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell) {
    if (cell == "NaN" || cell == "nan" || cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    // strtod rather than stod: subnormal values are valid cells
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) throw std::invalid_argument("bad number '" + cell + "'");
    return v;
}

bool is_value_column(const std::string& name) {
    return name != "t" && name != "jump_flag" && !ends_with(name, "_se");
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

std::string format_number(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x); // no "-0"
    return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << '\n';
    }
    if (!os) throw IoError("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(is, line)) throw SchemaMismatch(path.string() + ": empty file");
    table.header = split(line, ',');
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != table.header.size()) {
            throw SchemaMismatch(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(table.header.size()) + " cells");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        try {
            for (const auto& c : cells) row.push_back(parse_cell(c));
        } catch (const std::exception& e) {
            throw SchemaMismatch(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

bool CompareReport::passed() const {
    return std::all_of(columns.begin(), columns.end(),
                       [](const ColumnDeviation& c) { return c.violations == 0; });
}

std::string CompareReport::to_text() const {
    std::ostringstream os;
    os << "column                max_abs         rms             rows  criterion        violations\n";
    for (const auto& c : columns) {
        char line[200];
        std::snprintf(line, sizeof line, "%-20s  %-14s  %-14s  %-5zu %-16s %zu\n", c.name.c_str(),
                      format_number(c.max_abs).c_str(), format_number(c.rms).c_str(), c.compared,
                      c.uses_std_error ? "3*stdError" : ("tol=" + format_number(tolerance)).c_str(),
                      c.violations);
        os << line;
    }
    os << (passed() ? "PASS" : "FAIL") << '\n';
    return os.str();
}

CompareReport compare_tables(const CsvTable& a, const CsvTable& b, double tolerance) {
    std::vector<std::string> cols_a, cols_b;
    for (const auto& h : a.header)
        if (is_value_column(h)) cols_a.push_back(h);
    for (const auto& h : b.header)
        if (is_value_column(h)) cols_b.push_back(h);
    if (!a.has_column("t") || !b.has_column("t")) throw SchemaMismatch("both tables need a 't' column");
    if (cols_a != cols_b) throw SchemaMismatch("value columns differ");
    if (a.rows.size() != b.rows.size()) throw SchemaMismatch("tables have different row counts");

    const std::size_t ta = a.column("t"), tb = b.column("t");
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const double x = a.rows[r][ta], y = b.rows[r][tb];
        if (std::abs(x - y) > 1e-9 * std::max({1.0, std::abs(x), std::abs(y)})) {
            throw SchemaMismatch("time grids differ at row " + std::to_string(r + 1));
        }
    }

    CompareReport report;
    report.tolerance = tolerance;
    for (const auto& name : cols_a) {
        ColumnDeviation dev;
        dev.name = name;
        const std::size_t ia = a.column(name), ib = b.column(name);
        const bool se_a = a.has_column(name + "_se"), se_b = b.has_column(name + "_se");
        dev.uses_std_error = se_a || se_b;
        double sum_sq = 0.0;
        for (std::size_t r = 0; r < a.rows.size(); ++r) {
            const double x = a.rows[r][ia], y = b.rows[r][ib];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            const double d = std::abs(x - y);
            ++dev.compared;
            dev.max_abs = std::max(dev.max_abs, d);
            sum_sq += d * d;
            double band = tolerance;
            if (dev.uses_std_error) {
                const double sa = se_a ? a.rows[r][a.column(name + "_se")] : 0.0;
                const double sb = se_b ? b.rows[r][b.column(name + "_se")] : 0.0;
                band = 3.0 * std::sqrt(sa * sa + sb * sb) + 1e-12;
            }
            if (d > band) ++dev.violations;
        }
        dev.rms = dev.compared ? std::sqrt(sum_sq / static_cast<double>(dev.compared)) : 0.0;
        report.columns.push_back(dev);
    }
    return report;
}

} // namespace qts::cli
