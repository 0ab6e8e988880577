#ifndef PHASESIM_CSV_HPP
#define PHASESIM_CSV_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phasesim/phase_space.hpp"

namespace phasesim {

/// Shortest decimal text that round-trips the exact double.
std::string format_double(double x);

/// Column-ordered numeric table with a header row. Columns marked integer are
/// printed without a decimal point.
class CsvTable {
   public:
    explicit CsvTable(std::vector<std::string> columns);

    void mark_integer(std::string_view column);
    void add_row(const std::vector<double>& values);

    const std::vector<std::string>& columns() const { return columns_; }
    size_t column_index(std::string_view column) const;  // ValidationError if absent
    bool has_column(std::string_view column) const;
    size_t row_count() const { return rows_.size(); }
    double at(size_t row, size_t col) const { return rows_.at(row).at(col); }

    std::string to_string() const;
    void write(const std::filesystem::path& path) const;

   private:
    std::vector<std::string> columns_;
    std::vector<bool> integer_;
    std::vector<std::vector<double>> rows_;
};

/// Matrix snapshot: four header lines (domain bounds and resolution), then nq
/// rows of np comma-separated values (rows sweep q, columns sweep p).
void write_density_csv(const GridDensity& d, const std::filesystem::path& path);

/// Writes exact bytes; IoError on any failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace phasesim

#endif
