// report.hpp: CSV tables of observables and run-to-run comparison.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace qts::cli {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index by name; throws std::out_of_range when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

/// Writes a header row and values with 12 significant digits.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
std::string format_number(double x);

/// Thrown when two tables cannot be compared column by column.
struct SchemaMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ColumnDeviation {
    std::string name;
    double max_abs = 0.0;
    double rms = 0.0;
    std::size_t compared = 0;   // rows where both values are finite
    bool uses_std_error = false;
    std::size_t violations = 0; // rows outside the acceptance band
};

struct CompareReport {
    std::vector<ColumnDeviation> columns;
    double tolerance = 0.0;
    bool passed() const;
    std::string to_text() const;
};

/// Compares value columns of two tables on the same grid. Columns named
/// `<col>_se` hold standard errors; where present, a row passes when
/// |a - b| <= 3 sqrt(se_a^2 + se_b^2) + 1e-12, otherwise when |a - b| <= tolerance.
/// Rows where either value is NaN are skipped. `jump_flag` is ignored.
CompareReport compare_tables(const CsvTable& a, const CsvTable& b, double tolerance);

} // namespace qts::cli
